//! Wigner functions of vacuum, one phonon and a squeezed phonon, printed as
//! a coarse character map.
//!
//! `cargo run --release --example squeezed_wigner`

use z2sim::analysis::{wigner, PhaseSpaceGrid};
use z2sim::hilbert::{build_layout, embed_kind, expect_real, LocalKind, QuantumState, SubsystemSpec};
use z2sim::prep_measure::{squeeze, SqueezeParams};

fn main() -> z2sim::Result<()> {
    let layout = build_layout(vec![SubsystemSpec::oscillator("m", 25)])?;
    let one = QuantumState::basis(layout.clone(), &[1])?;
    let states = [
        ("vacuum", QuantumState::basis(layout.clone(), &[0])?),
        ("fock 1", one.clone()),
        ("S(0.96)|1>", squeeze(&one, 0, &SqueezeParams::new(0.96, 0.0)?)?),
    ];
    let grid = PhaseSpaceGrid::square(3.0, 21);
    let parity = embed_kind(LocalKind::Parity, 0, &layout)?;
    for (name, st) in &states {
        let w = wigner(st, 0, &grid)?;
        println!(
            "{name}: parity {:+.6}, W range [{:+.3}, {:+.3}], integral {:.4}",
            expect_real(st, &parity)?,
            w.min(),
            w.max(),
            w.integral()
        );
        for j in (0..grid.im.len()).rev() {
            let row: String = (0..grid.re.len())
                .map(|i| match w.values[(i, j)] {
                    v if v < -0.05 => '-',
                    v if v > 0.3 => '#',
                    v if v > 0.05 => '+',
                    _ => '.',
                })
                .collect();
            println!("  {row}");
        }
    }
    Ok(())
}
