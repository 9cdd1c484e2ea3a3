//! L1 norms of the Littlewood-Paley kernels against their bounds, and the
//! composite kernel by factorization and Monte Carlo.

use muskat::kernels::{verify_composite_lemma, verify_kernel_lemma, KernelTable};

fn main() -> muskat::Result<()> {
    let table = KernelTable::global();
    let ks: Vec<i32> = (0..6).collect();
    let scales: Vec<f64> = (-4..4).map(|e| 2f64.powi(e)).collect();
    let report = verify_kernel_lemma(table, &ks, &scales)?;
    for s in &report.summaries {
        println!("{:<16} max ratio {:>8.4} spread over k {:.4}", s.lemma_id, s.max_ratio, s.spread_of_constants);
    }
    let (_, summary, ests) = verify_composite_lemma(table, 0, &[0, 2, 4, 6], 1000, 7)?;
    for e in &ests {
        println!(
            "k1={} k2={}: factorized {:.4e}, monte carlo {:.4e} +- {:.1e}, bound {:.4e}",
            e.k1, e.k2, e.factorized, e.monte_carlo, e.std_error, e.bound_rhs
        );
    }
    println!("composite spread {:.4}", summary.spread_of_constants);
    Ok(())
}
