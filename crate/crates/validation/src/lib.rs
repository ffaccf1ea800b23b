//! Holds the `acceptance` test target; see `tests/acceptance.rs`.
//!
//! It lives in its own package so that it runs after every other test in the
//! workspace and a failing criterion does not hide their results.
