//! Holds the `acceptance` test target. It lives in its own package so it runs
//! after the core and CLI suites.
