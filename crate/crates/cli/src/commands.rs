use std::sync::Arc;

use ladder_core::dimer::{dimer_level_crossing, enumerate_ground_space};
use ladder_core::par::{map_indexed, Exec};
use ladder_core::rg_chain::{chain_critical_xi, chain_flow_classify, chain_nu_exponent, ChainCouplings};
use ladder_core::rg_dimer::{boundary_at_xi_over_u, boundary_point, critical_ubar, run_flow, DimerRgCouplings, MAX_STEPS};
use ladder_core::spectra::{fit_log_gaps, gap_scan_in, observables, Axis, GapScan, ScanSpec, SpectrumOptions};
use ladder_core::{Basis, Couplings, LanczosOptions, Lattice, Sector};

use crate::config::{CommandName, RunConfig, SectorName};
use crate::output::{Cell, Table};

/// Inverse level spacing of the single-plaquette estimate of the transition.
const PLAQUETTE_C: f64 = 0.6;

pub fn run(command: CommandName, cfg: &RunConfig) -> Table {
    match command {
        CommandName::PhaseEd => phase_ed(cfg),
        CommandName::GapScan => gap_scan(cfg),
        CommandName::GapScaling => gap_scaling(cfg),
        CommandName::RgFlow => rg_flow(cfg),
        CommandName::RgBoundary => rg_boundary(cfg),
        CommandName::ChainRg => chain_rg(cfg),
        CommandName::Dimer => dimer(cfg),
    }
}

fn spectrum_options(cfg: &RunConfig) -> SpectrumOptions {
    SpectrumOptions {
        lanczos: LanczosOptions {
            tol: cfg.tol(),
            seed: cfg.seed(),
            ..Default::default()
        },
        sector: match cfg.sector {
            Some(SectorName::Full) => Sector::Full,
            _ => Sector::ZeroMomentum,
        },
    }
}

fn bases(cfg: &RunConfig, opts: &SpectrumOptions) -> Vec<Result<Arc<Basis>, String>> {
    cfg.sizes()
        .into_iter()
        .map(|l| Lattice::new(l).map(|lat| Arc::new(Basis::new(lat, opts.sector))).map_err(|e| e.to_string()))
        .collect()
}

pub const PHASE_ED_COLUMNS: &[&str] = &[
    "l",
    "k",
    "u",
    "gamma",
    "xi_tt",
    "k_over_u",
    "gamma_over_u",
    "xi_over_u",
    "e0",
    "e1",
    "gap",
    "m_top_staggered",
    "m_bottom",
    "s_staggered",
    "de0_dgamma",
    "de0_dxi",
    "overlay_first_order",
    "overlay_large_k",
    "error",
];

fn phase_ed(cfg: &RunConfig) -> Table {
    let mut table = Table::new(PHASE_ED_COLUMNS);
    let opts = spectrum_options(cfg);
    let u = cfg.u();
    for (l, basis) in cfg.sizes().into_iter().zip(bases(cfg, &opts)) {
        let mut points = Vec::new();
        for &k in &cfg.k_values() {
            for &xi in &cfg.xi_values() {
                for &g in &cfg.gamma_values() {
                    points.push((k, xi, g));
                }
            }
        }
        let rows = map_indexed(Exec::Parallel, points.len(), |i| {
            let (k, xi, g) = points[i];
            let lead: Vec<Cell> = vec![
                l.into(),
                k.into(),
                u.into(),
                g.into(),
                xi.into(),
                (k / u).into(),
                (g / u).into(),
                (xi / u).into(),
            ];
            let basis = match &basis {
                Ok(b) => b,
                Err(e) => return Err((lead, e.clone())),
            };
            match observables(Couplings::uniform(k, u, g, xi), basis, &opts) {
                Ok(o) => {
                    let mut row = lead;
                    let ku = k / u;
                    row.extend([
                        o.energies[0].into(),
                        o.energies[1].into(),
                        o.gap.into(),
                        o.m_top_staggered.into(),
                        o.m_bottom.into(),
                        o.s_staggered.into(),
                        o.derivatives.map(|d| d.d_gamma).into(),
                        o.derivatives.map(|d| d.d_xi).into(),
                        (1.0 / PLAQUETTE_C + 1.0 / (4.0 * ku * PLAQUETTE_C.powi(3))).into(),
                        ku.into(),
                    ]);
                    Ok(row)
                }
                Err(e) => Err((lead, e.to_string())),
            }
        });
        for r in rows {
            match r {
                Ok(row) => table.push(row),
                Err((lead, msg)) => table.push_error(lead, msg),
            }
        }
    }
    table
}

pub const GAP_SCAN_COLUMNS: &[&str] = &[
    "kind",
    "l",
    "k",
    "u",
    "xi_tt",
    "k_over_u",
    "xi_over_u",
    "gamma",
    "gamma_over_u",
    "gap",
    "error",
];

// One scan per (L, K, Ξ); a failed scan becomes a single error row.
fn scans(cfg: &RunConfig) -> Vec<((usize, f64, f64), Result<GapScan, String>)> {
    let opts = spectrum_options(cfg);
    let u = cfg.u();
    let r = cfg.gamma_range().expect("checked when the config was resolved");
    let spec = ScanSpec::new(Axis::Gamma, r.from, r.to, r.points);
    let mut out = Vec::new();
    for (l, basis) in cfg.sizes().into_iter().zip(bases(cfg, &opts)) {
        for &k in &cfg.k_values() {
            for &xi in &cfg.xi_values() {
                let res = basis.clone().and_then(|b| {
                    gap_scan_in(&Couplings::uniform(k, u, 0.0, xi), &b, &spec, &opts).map_err(|e| e.to_string())
                });
                out.push(((l, k, xi), res));
            }
        }
    }
    out
}

fn gap_scan(cfg: &RunConfig) -> Table {
    let mut table = Table::new(GAP_SCAN_COLUMNS);
    let u = cfg.u();
    for ((l, k, xi), res) in scans(cfg) {
        let lead = |kind: &str| -> Vec<Cell> {
            vec![kind.into(), l.into(), k.into(), u.into(), xi.into(), (k / u).into(), (xi / u).into()]
        };
        match res {
            Ok(scan) => {
                let points = scan
                    .samples
                    .iter()
                    .map(|&(g, gap)| ("sample", g, gap))
                    .chain(scan.minima.iter().map(|m| ("minimum", m.location, m.gap)))
                    .chain(std::iter::once(("global_minimum", scan.global_min.location, scan.global_min.gap)));
                for (kind, g, gap) in points {
                    let mut row = lead(kind);
                    row.extend([g.into(), (g / u).into(), gap.into()]);
                    table.push(row);
                }
            }
            Err(e) => table.push_error(lead("scan"), e),
        }
    }
    table
}

pub const GAP_SCALING_COLUMNS: &[&str] = &[
    "kind",
    "u",
    "k_over_u",
    "xi_over_u",
    "l",
    "gamma_over_u",
    "gap",
    "ln_gap",
    "slope",
    "intercept",
    "r_squared",
    "slope_per_decade",
    "error",
];

fn gap_scaling(cfg: &RunConfig) -> Table {
    let mut table = Table::new(GAP_SCALING_COLUMNS);
    let u = cfg.u();
    let all = scans(cfg);
    for &k in &cfg.k_values() {
        for &xi in &cfg.xi_values() {
            let lead = |kind: &str| -> Vec<Cell> { vec![kind.into(), u.into(), (k / u).into(), (xi / u).into()] };
            let mut sizes = Vec::new();
            let mut gaps = Vec::new();
            for ((l, kk, xx), res) in &all {
                if *kk != k || *xx != xi {
                    continue;
                }
                let mut row = lead("point");
                row.push((*l).into());
                match res {
                    Ok(scan) => {
                        let m = scan.global_min;
                        row.extend([(m.location / u).into(), m.gap.into(), m.gap.ln().into()]);
                        table.push(row);
                        sizes.push(*l);
                        gaps.push(m.gap);
                    }
                    Err(e) => table.push_error(row, e.clone()),
                }
            }
            if sizes.is_empty() {
                continue;
            }
            match fit_log_gaps(&sizes, &gaps) {
                Ok(fit) => {
                    let mut row = lead("fit");
                    row.extend([Cell::Empty, Cell::Empty, Cell::Empty, Cell::Empty]);
                    row.extend([
                        fit.slope.into(),
                        fit.intercept.into(),
                        fit.r_squared.into(),
                        fit.slope_per_decade().into(),
                    ]);
                    table.push(row);
                }
                Err(e) => table.push_error(lead("fit"), e.to_string()),
            }
        }
    }
    table
}

pub const RG_FLOW_COLUMNS: &[&str] = &[
    "l",
    "u",
    "gamma",
    "v",
    "xi",
    "ubar",
    "alpha1",
    "alpha2",
    "z",
    "beta1",
    "beta2",
    "length_ratio",
    "bare_u",
    "error",
];

fn rg_flow(cfg: &RunConfig) -> Table {
    let mut table = Table::new(RG_FLOW_COLUMNS);
    let gamma = cfg.gamma_single().expect("checked when the config was resolved");
    let xi = cfg.xi_single().expect("checked when the config was resolved");
    let bare_u = match cfg.u {
        Some(u) => Ok(u),
        None => critical_ubar(gamma, xi, cfg.tol()).map(|ub| ub + cfg.u_offset.unwrap_or(0.0)),
    };
    let flow = bare_u.and_then(|u| {
        let bare = DimerRgCouplings {
            u,
            gamma,
            v: cfg.v.unwrap_or(0.0),
            xi,
        };
        run_flow(bare, cfg.steps.unwrap_or(60), 0.0)
    });
    match flow {
        Ok(states) => {
            for s in states {
                let c = s.couplings;
                let p = s.point;
                table.push(vec![
                    s.l.into(),
                    c.u.into(),
                    c.gamma.into(),
                    c.v.into(),
                    c.xi.into(),
                    s.ubar.into(),
                    p.alpha1.into(),
                    p.alpha2.into(),
                    p.z.into(),
                    p.beta1.into(),
                    p.beta2.into(),
                    s.length_ratio.into(),
                    s.bare_u.into(),
                ]);
            }
        }
        Err(e) => table.push_error(vec![0usize.into()], e.to_string()),
    }
    table
}

pub const RG_BOUNDARY_COLUMNS: &[&str] = &[
    "source",
    "gamma",
    "xi",
    "xi_over_u",
    "gamma_over_u",
    "ubar",
    "l_converged",
    "error",
];

fn rg_boundary(cfg: &RunConfig) -> Table {
    let mut table = Table::new(RG_BOUNDARY_COLUMNS);
    let tol = cfg.tol();
    let converged = |g: f64, x: f64| {
        run_flow(DimerRgCouplings::bare(0.0, g, x), MAX_STEPS, tol).map(|s| (s.last().unwrap().ubar, s.len() - 1))
    };
    let targets = cfg.xi_values();
    // Each target is solved on its own so one failure stays local.
    let swept = map_indexed(Exec::Parallel, targets.len(), |i| boundary_at_xi_over_u(targets[i]));
    for (target, res) in targets.iter().zip(swept) {
        let result = res.and_then(|p| {
            let ubar = 1.0 / p.gamma_over_u;
            let xi = p.xi_over_u * ubar;
            let (ub, steps) = converged(1.0, xi)?;
            Ok((xi, p, ub, steps))
        });
        match result {
            Ok((xi, p, ub, steps)) => table.push(vec![
                "sweep".into(),
                1.0.into(),
                xi.into(),
                p.xi_over_u.into(),
                p.gamma_over_u.into(),
                ub.into(),
                steps.into(),
            ]),
            Err(e) => table.push_error(vec!["sweep".into(), 1.0.into(), Cell::Empty, (*target).into()], e.to_string()),
        }
    }
    for &[g, x] in cfg.rays.as_deref().unwrap_or(&[]) {
        let result = boundary_point(g, x).and_then(|p| converged(g, x).map(|(ub, steps)| (p, ub, steps)));
        match result {
            Ok((p, ub, steps)) => table.push(vec![
                "ray".into(),
                g.into(),
                x.into(),
                p.xi_over_u.into(),
                p.gamma_over_u.into(),
                ub.into(),
                steps.into(),
            ]),
            Err(e) => table.push_error(vec!["ray".into(), g.into(), x.into()], e.to_string()),
        }
    }
    table
}

pub const CHAIN_RG_COLUMNS: &[&str] = &["kind", "gamma", "xi", "phase", "slope", "y_gamma", "nu", "error"];

fn chain_rg(cfg: &RunConfig) -> Table {
    let mut table = Table::new(CHAIN_RG_COLUMNS);
    let gammas = cfg.gamma_values();
    for &g in &gammas {
        match chain_critical_xi(g) {
            Ok(x) => table.push(vec!["curve".into(), g.into(), x.into()]),
            Err(e) => table.push_error(vec!["curve".into(), g.into()], e.to_string()),
        }
    }
    for &g in &gammas {
        for &x in &cfg.xi_values() {
            match ChainCouplings::new(g, x).and_then(chain_flow_classify) {
                Ok(p) => table.push(vec!["classify".into(), g.into(), x.into(), p.label().into()]),
                Err(e) => table.push_error(vec!["classify".into(), g.into(), x.into()], e.to_string()),
            }
        }
    }
    let nu = chain_nu_exponent();
    table.push(vec![
        "exponent".into(),
        1.0.into(),
        0.0.into(),
        "critical".into(),
        nu.slope.into(),
        nu.y_gamma.into(),
        nu.nu.into(),
    ]);
    table
}

pub const DIMER_COLUMNS: &[&str] = &[
    "kind",
    "l",
    "columnar_count",
    "staggered_count",
    "total",
    "xi_tt_over_u",
    "gamma_t_over_u",
    "error",
];

fn dimer(cfg: &RunConfig) -> Table {
    let mut table = Table::new(DIMER_COLUMNS);
    let r = cfg.gamma_range().expect("checked when the config was resolved");
    let sizes = cfg.sizes();
    for &l in &sizes {
        match enumerate_ground_space(l) {
            Ok(c) => table.push(vec![
                "census".into(),
                l.into(),
                c.columnar_count.into(),
                c.staggered_count.into(),
                c.total.into(),
            ]),
            Err(e) => table.push_error(vec!["census".into(), l.into()], e.to_string()),
        }
    }
    let xis = cfg.xi_values();
    let jobs: Vec<(f64, usize)> = xis.iter().flat_map(|&x| sizes.iter().map(move |&l| (x, l))).collect();
    let found = map_indexed(Exec::Parallel, jobs.len(), |i| {
        let (x, l) = jobs[i];
        dimer_level_crossing(x, l, r.from, r.to)
    });
    for (&(x, l), res) in jobs.iter().zip(found) {
        let lead: Vec<Cell> = vec!["crossing".into(), l.into(), Cell::Empty, Cell::Empty, Cell::Empty, x.into()];
        match res {
            Ok(c) => {
                let mut row = lead;
                row.push(c.gamma_over_u.into());
                table.push(row);
            }
            Err(e) => table.push_error(lead, e.to_string()),
        }
    }
    table
}
