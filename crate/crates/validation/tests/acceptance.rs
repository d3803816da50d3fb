// Acceptance suite. Every check prints one PASS/FAIL line before asserting,
// so `cargo test --test acceptance` doubles as a report.

use std::collections::HashMap;
use std::io::Write;
use std::sync::{Arc, Mutex, OnceLock};
use std::time::{Duration, Instant};

use ladder_core::dimer::*;
use ladder_core::hamiltonian::diagonal_energy;
use ladder_core::lanczos::sorted_eigen;
use ladder_core::rg_chain::*;
use ladder_core::rg_dimer::*;
use ladder_core::spectra::*;
use ladder_core::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// Written to the real stdout so the line shows up even when the harness
// captures output of passing tests.
fn report(name: &str, pass: bool, detail: String) {
    let line = format!("[{}] {name}: {detail}\n", if pass { "PASS" } else { "FAIL" });
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(line.as_bytes());
    let _ = out.flush();
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

// Gap scans at K/U = 5 (or other K) are expensive at L = 10 and several
// criteria share them, so each distinct scan runs once per process.
struct Scanned {
    scan: GapScan,
    elapsed: Duration,
}

type ScanKey = (usize, u64, u64, u64, u64, usize);

fn scan(l: usize, k: f64, xi: f64, lo: f64, hi: f64, n: usize) -> Arc<Scanned> {
    static CACHE: OnceLock<Mutex<HashMap<ScanKey, Arc<OnceLock<Arc<Scanned>>>>>> = OnceLock::new();
    let key = (l, k.to_bits(), xi.to_bits(), lo.to_bits(), hi.to_bits(), n);
    let cell = CACHE.get_or_init(Default::default).lock().unwrap().entry(key).or_default().clone();
    cell.get_or_init(|| {
        let t = Instant::now();
        let scan = gap_scan(
            &Couplings::uniform(k, 1.0, 0.0, xi),
            Lattice::new(l).unwrap(),
            &ScanSpec::new(Axis::Gamma, lo, hi, n),
            &SpectrumOptions::default(),
        )
        .unwrap();
        Arc::new(Scanned { scan, elapsed: t.elapsed() })
    })
    .clone()
}

// Windows bracketing the transition at every size used below.
fn scan_no_catalyst(l: usize) -> Arc<Scanned> {
    scan(l, 5.0, 0.0, 1.0, 3.0, 21)
}

fn scan_strong_catalyst(l: usize) -> Arc<Scanned> {
    scan(l, 5.0, -2.0, 1.5, 4.0, 51)
}

#[test]
fn rg_critical_point_without_catalyst() {
    let t = Instant::now();
    let ubar = critical_ubar(1.0, 0.0, DEFAULT_UBAR_TOL).unwrap();
    let elapsed = t.elapsed();
    let ratio = 1.0 / ubar;
    let pass = rel(ratio, 1.9314900) < 1e-5 && elapsed < Duration::from_secs(1);
    report("rg critical point, no catalyst", pass, format!("Gamma/Ubar = {ratio:.8} (target 1.9314900), {elapsed:?}"));
    assert!(pass);
}

#[test]
fn rg_critical_points_with_catalysts() {
    let t = Instant::now();
    let minus = critical_ubar(1.0, -1.0, DEFAULT_UBAR_TOL).unwrap();
    let plus = critical_ubar(1.0, 1.0, DEFAULT_UBAR_TOL).unwrap();
    let elapsed = t.elapsed();
    let pass = rel(minus, 0.52956828) < 1e-5 && rel(plus, 0.61474501) < 1e-5 && elapsed < Duration::from_secs(5);
    report(
        "rg critical points with catalysts",
        pass,
        format!("Ubar(1,-1) = {minus:.8} (0.52956828), Ubar(1,+1) = {plus:.8} (0.61474501), {elapsed:?}"),
    );
    assert!(pass);
}

#[test]
fn rg_flow_asymptotics_at_criticality() {
    // The bare U is the critical value itself; 0.51773501 is that value to
    // eight digits, and any residual offset grows as 3^l.
    let ubar = critical_ubar(1.0, 0.0, DEFAULT_UBAR_TOL).unwrap();
    let flow = run_flow(DimerRgCouplings::bare(ubar, 1.0, 0.0), 60, 0.0).unwrap();
    let end = flow[60].couplings;
    let small = end.gamma.abs().max(end.xi.abs());
    let pass = small < 1e-8 && end.v > 0.0 && end.u.abs() < 1e-6;
    let rounded = run_flow(DimerRgCouplings::bare(0.51773501, 1.0, 0.0), 60, 0.0).unwrap()[60].couplings.u;
    report(
        "rg flow asymptotics",
        pass,
        format!(
            "U0 = {ubar:.12}: max(|Gamma|,|Xi|)(60) = {small:.3e}, V(60) = {:.8}, U(60) = {:.3e}; with U0 = 0.51773501, U(60) = {rounded:.3e}",
            end.v, end.u
        ),
    );
    assert!(pass);
}

#[test]
fn rg_scaling_dimension_is_one() {
    let mut lines = Vec::new();
    let mut pass = true;
    for (g, x) in [(1.0, 0.0), (1.0, -1.0), (1.0, 1.0)] {
        let y = scaling_dimension_yu(g, x).unwrap().y_u;
        pass &= (y - 1.0).abs() < 1e-3;
        lines.push(format!("({g},{x}) y_U = {y:.6}"));
    }
    report("rg scaling dimension", pass, lines.join(", "));
    assert!(pass);
}

#[test]
fn rg_zero_field_sign_symmetry() {
    let mut worst: f64 = 0.0;
    for x in [0.5, 1.0, 2.0] {
        let a = critical_ubar(0.0, x, DEFAULT_UBAR_TOL).unwrap();
        let b = critical_ubar(0.0, -x, DEFAULT_UBAR_TOL).unwrap();
        worst = worst.max((a - b).abs());
    }
    let pass = worst < 1e-10;
    report("rg zero-field sign symmetry", pass, format!("max |Ubar(0,X) - Ubar(0,-X)| = {worst:.3e}"));
    assert!(pass);
}

#[test]
fn chain_rg_critical_curve_and_exponent() {
    let at_one = chain_critical_xi(1.0).unwrap();
    let at_zero = chain_critical_xi(0.0).unwrap();
    let nu = chain_nu_exponent();
    let pass = at_one == 0.0 && at_zero == 1.0 && (nu.slope - 2.0).abs() < 1e-5 && (nu.nu - 1.0).abs() < 1e-5;
    report(
        "chain rg",
        pass,
        format!("xi_c(1) = {at_one}, xi_c(0) = {at_zero}, slope = {:.8}, nu = {:.8}", nu.slope, nu.nu),
    );
    assert!(pass);
}

#[test]
fn lanczos_matches_dense_on_small_ladders() {
    let lat = Lattice::new(4).unwrap();
    let basis = Arc::new(Basis::new(lat, Sector::Full));
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let c = Couplings {
            k: rng.gen_range(0.2..5.0),
            u: rng.gen_range(-2.0..2.0),
            gamma_t: rng.gen_range(-3.0..3.0),
            gamma_b: rng.gen_range(-3.0..3.0),
            xi_tt: rng.gen_range(-3.0..3.0),
            xi_bb: rng.gen_range(-3.0..3.0),
            xi_tb: rng.gen_range(-3.0..3.0),
        };
        let h = Hamiltonian::new(c, basis.clone()).unwrap();
        let (dense, _) = sorted_eigen(h.to_dense());
        let res = lowest_eigenpairs(&h, &LanczosOptions::default()).unwrap();
        for (a, b) in res.eigenvalues.iter().zip(&dense) {
            worst = worst.max((a - b).abs());
        }
    }
    let pass = worst < 1e-10;
    report("lanczos vs dense", pass, format!("max eigenvalue deviation over 20 sets = {worst:.3e}"));
    assert!(pass);
}

#[test]
fn minimum_gap_location_without_catalyst() {
    let s = scan_no_catalyst(10);
    let loc = s.scan.global_min.location;
    let pass = (1.75..=1.95).contains(&loc) && s.elapsed < Duration::from_secs(300);
    report(
        "minimum-gap location",
        pass,
        format!("L=10 Gamma/U = {loc:.5}, gap {:.3e}, {:?}", s.scan.global_min.gap, s.elapsed),
    );
    assert!(pass);
}

#[test]
fn double_well_switches_minimum() {
    let a = scan(10, 1.49, 0.0, 1.0, 3.0, 41);
    let b = scan(10, 1.5, 0.0, 1.0, 3.0, 41);
    let (ga, gb) = (a.scan.global_min.location, b.scan.global_min.location);
    let two = a.scan.minima.len() >= 2 && b.scan.minima.len() >= 2;
    // Same well means the two global minima sit next to each other.
    let nearest = |x: f64, ms: &[GapMinimum]| {
        ms.iter().enumerate().min_by(|p, q| (p.1.location - x).abs().total_cmp(&(q.1.location - x).abs())).unwrap().0
    };
    let well_a = nearest(ga, &a.scan.minima);
    let well_b_in_a = nearest(gb, &a.scan.minima);
    let pass = two && well_a != well_b_in_a;
    report(
        "double well",
        pass,
        format!(
            "K/U=1.49 minima {:?} global {ga:.4}; K/U=1.5 minima {:?} global {gb:.4}",
            a.scan.minima.iter().map(|m| (round4(m.location), m.gap)).collect::<Vec<_>>(),
            b.scan.minima.iter().map(|m| (round4(m.location), m.gap)).collect::<Vec<_>>()
        ),
    );
    assert!(pass);
}

fn round4(x: f64) -> f64 {
    (x * 1e4).round() / 1e4
}

#[test]
fn gap_scaling_with_and_without_catalyst() {
    let sizes = [4usize, 6, 8, 10];
    let fit = |scans: Vec<Arc<Scanned>>| {
        let gaps: Vec<f64> = scans.iter().map(|s| s.scan.global_min.gap).collect();
        fit_log_gaps(&sizes, &gaps).unwrap()
    };
    let plain = fit(sizes.iter().map(|&l| scan_no_catalyst(l)).collect());
    let cat = fit(sizes.iter().map(|&l| scan_strong_catalyst(l)).collect());
    let (sp, sc) = (plain.slope_per_decade(), cat.slope_per_decade());
    let checks = [
        ("r2(Xi=0) > 0.98", plain.r_squared > 0.98),
        ("r2(Xi=-2) > 0.98", cat.r_squared > 0.98),
        ("slope(Xi=0) within 30% of -0.43", rel(sp, -0.43) < 0.3),
        ("slope(Xi=-2) within 30% of -0.24", rel(sc, -0.24) < 0.3),
        ("|slope(Xi=-2)| < |slope(Xi=0)|", sc.abs() < sp.abs()),
    ];
    let pass = checks.iter().all(|c| c.1);
    let failed: Vec<&str> = checks.iter().filter(|c| !c.1).map(|c| c.0).collect();
    report(
        "gap scaling",
        pass,
        format!(
            "Xi=0: slope/decade {sp:.4}, r2 {:.4}; Xi=-2: slope/decade {sc:.4}, r2 {:.4}; failed: {failed:?}",
            plain.r_squared, cat.r_squared
        ),
    );
    assert!(pass);
}

#[test]
fn first_order_signatures_with_weak_catalyst() {
    let s = scan(10, 5.0, -0.4, 1.5, 3.0, 16);
    let x = s.scan.global_min.location;
    let basis = Arc::new(Basis::new(Lattice::new(10).unwrap(), Sector::ZeroMomentum));
    let opts = SpectrumOptions::default();
    let at = |g: f64| observables(Couplings::uniform(5.0, 1.0, g, -0.4), &basis, &opts).unwrap();
    let (left, right) = (at(x - 0.01), at(x + 0.01));
    let s_jump = (right.s_staggered - left.s_staggered).abs();
    let de = right.derivatives.unwrap().d_gamma - left.derivatives.unwrap().d_gamma;
    let pass = s_jump > 0.5 && de.abs() > 0.0;
    report(
        "first-order signatures",
        pass,
        format!(
            "transition at Gamma/U = {x:.5}; S {:.4} -> {:.4} (jump {s_jump:.4}); dE0/dGamma jump {de:.4}",
            left.s_staggered, right.s_staggered
        ),
    );
    assert!(pass);
}

#[test]
fn dimer_census() {
    let mut pass = true;
    let mut brute = Vec::new();
    for (l, expected) in [(4usize, 9u64), (6, 20)] {
        let lat = Lattice::new(l).unwrap();
        let c = Couplings::uniform(1.0, 0.0, 0.0, 0.0);
        let e: Vec<f64> = (0..lat.hilbert_dim() as u64).map(|b| diagonal_energy(&c, &lat, b)).collect();
        let min = e.iter().cloned().fold(f64::INFINITY, f64::min);
        let count = e.iter().filter(|&&v| v < min + 1e-9).count() as u64;
        let total = enumerate_ground_space(l).unwrap().total;
        pass &= count == expected && total == count;
        brute.push(format!("L={l}: brute {count}, census {total}"));
    }
    for l in (4..=20).step_by(2) {
        pass &= enumerate_ground_space(l).unwrap().total == fibonacci(l - 1) + fibonacci(l - 3) + 2;
    }
    report("dimer census", pass, format!("{}; Fibonacci identity checked for L = 4..20", brute.join(", ")));
    assert!(pass);
}

#[test]
fn dimer_level_crossing_location() {
    let c = dimer_level_crossing(0.0, 10, 1.0, 3.0).unwrap();
    let h = build_dimer_hamiltonian(1.0, c.gamma_over_u, 0.0, 10).unwrap();
    let m = h.to_dense();
    let mut leak = 0.0f64;
    for i in 0..h.dim() {
        for j in 0..h.dim() {
            if h.basis[i].winding != h.basis[j].winding {
                leak = leak.max(m[(i, j)].abs());
            }
        }
    }
    let pass = (c.gamma_over_u - 1.67).abs() <= 0.05 && leak == 0.0;
    report(
        "dimer crossing",
        pass,
        format!("L=10 Gamma_t/U = {:.8} (1.67 +/- 0.05), largest inter-sector element {leak}", c.gamma_over_u),
    );
    assert!(pass);
}

#[test]
fn rg_and_ed_boundaries_share_trend() {
    let ed0 = scan_no_catalyst(10).scan.global_min.location;
    let ed2 = scan_strong_catalyst(10).scan.global_min.location;
    let rg = phase_boundary((-2.0, 0.0), 2, Exec::default()).unwrap();
    let (rg2, rg0) = (rg[0].gamma_over_u, rg[1].gamma_over_u);
    let ed_up = ed2 > ed0;
    let rg_up = rg2 > rg0;
    let pass = ed_up && rg_up;
    report(
        "rg vs ed trend",
        pass,
        format!("ED Gamma/U: {ed0:.4} (Xi/U=0) -> {ed2:.4} (Xi/U=-2); RG Gamma/U: {rg0:.6} -> {rg2:.6}"),
    );
    assert!(pass);
}
