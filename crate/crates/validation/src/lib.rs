//! Acceptance criteria for `posgkit-core`. Run them with
//! `cargo test -p posgkit-validation --test acceptance`; each criterion prints
//! one `PASS` or `FAIL` line.
