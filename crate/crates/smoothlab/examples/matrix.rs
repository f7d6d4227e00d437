//! Runs a verification matrix and prints one line per row.
//!
//! `cargo run --release --example matrix [quick]`

use std::time::Instant;

use smoothlab::corpus::{corpus_entry, corpus_list};
use smoothlab::verify::{default_matrix, quick_matrix, run_check, Grids};

fn main() {
    let quick = std::env::args().any(|a| a == "quick");
    let filter: Option<String> = std::env::args().nth(1).filter(|a| a != "quick");
    let _ = corpus_list();
    for m in if quick { quick_matrix() } else { default_matrix() } {
        if let Some(f) = &filter {
            if !m.id.as_str().eq_ignore_ascii_case(f) {
                continue;
            }
        }
        let e = corpus_entry(&m.params.f).unwrap();
        let g = m.grids.clone().unwrap_or_else(|| Grids::for_grid(&e.grid(m.params.n).unwrap()));
        let t = Instant::now();
        let label = format!("{} {} {:?} p={} a={}", m.id, m.params.f, m.params.variant, m.params.p.value(), m.params.alpha);
        match run_check(m.id, &e, &m.params, &g, None) {
            Ok(r) => println!(
                "{label}: {:?} max={:.3e} min={:.3e} slope={:.3} [{:.1}s] ratios={:?} notes={:?}",
                r.verdict,
                r.stats.max,
                r.stats.min,
                r.stats.slope,
                t.elapsed().as_secs_f64(),
                r.ratio.iter().map(|x| format!("{x:.3}")).collect::<Vec<_>>(),
                r.notes
            ),
            Err(err) => println!("{label}: error {err} (expected {}) [{:.1}s]", m.expect_error, t.elapsed().as_secs_f64()),
        }
    }
}
