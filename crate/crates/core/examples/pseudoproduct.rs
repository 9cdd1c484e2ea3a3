//! The first Taylor term as a sum of band-localized pseudoproducts, and the
//! low-high / high-high split of one output band.

use muskat::initial_data::{superpose, CornerSpec};
use muskat::kernels::KernelTable;
use muskat::pseudoproduct::{all_triples, band_triples, interaction_split, SlotRoute};
use muskat::rhs::{taylor_term, AlphaQuadrature};
use muskat::spectral::{poisson_semigroup, DyadicBand, Grid};

fn main() -> muskat::Result<()> {
    let grid = Grid::new(512, 16.0)?;
    let q = AlphaQuadrature::standard(grid);
    let table = KernelTable::global();
    let h0 = superpose(&[CornerSpec::asymmetric(8.0, 0.025, 0.05)], grid)?;
    let h = poisson_semigroup(&h0, 0.05)?;
    let h = h.map(|v| v - h.mean());

    let n1 = taylor_term(&h, &h, 1, &q)?;
    let triples = all_triples(grid);
    for route in [SlotRoute::Multiplier, SlotRoute::Kernel] {
        let bt = band_triples(&h, &h, &h, &triples, table, &q, route)?;
        let err = bt.total(grid).sup_distance(&n1) / n1.max_abs();
        println!("{route:?}: {} triples, relative error {err:.3e}", triples.len());
    }

    let split = interaction_split(&h, &h, &h, DyadicBand::new(5), table, &q)?;
    let defect = split.low_high.add(&split.high_high).sup_distance(&split.full);
    println!(
        "band 5: |G1| {:.3e}, |G2| {:.3e}, |P_k T| {:.3e}, split defect {defect:.2e}",
        split.low_high.max_abs(),
        split.high_high.max_abs(),
        split.full.max_abs()
    );
    Ok(())
}
