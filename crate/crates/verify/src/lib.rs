//! Holds the `acceptance` test target, which exercises every stage of
//! `chball-core` against fixed numerical thresholds. Run it with
//! `cargo test -p chball-verify --test acceptance`.
