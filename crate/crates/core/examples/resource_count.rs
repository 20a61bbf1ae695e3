//! Qubits and oscillators needed to encode a few lattices, plus one read
//! from an edge list.
//!
//! `cargo run --example resource_count`

use z2sim::models::{resource_count, LatticeGraph};

fn main() -> z2sim::Result<()> {
    let edges = "# site_a site_b link\nA B ab\nB C bc\nC D cd\nD A da\nA C ac\n";
    let graphs = [
        ("link", LatticeGraph::link()),
        ("loop", LatticeGraph::loop_()),
        ("triangle", LatticeGraph::triangle()),
        ("tetrahedron", LatticeGraph::tetrahedron()),
        ("chain of 6", LatticeGraph::chain(6)?),
        ("square + diagonal", LatticeGraph::parse_edge_list(edges)?),
    ];
    println!("{:<18} {:>7} {:>12}", "graph", "qubits", "oscillators");
    for (name, g) in &graphs {
        let c = resource_count(g);
        println!("{name:<18} {:>7} {:>12}", c.qubits, c.oscillators);
    }
    Ok(())
}
