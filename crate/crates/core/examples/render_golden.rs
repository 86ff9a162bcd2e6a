//! Prints the worked example as DOT: the knowledge graph, then the designed
//! architecture graph.

use mtagd_core::designer::DesignOptions;
use mtagd_core::io::{to_dot, DotOptions};
use mtagd_core::{connect_exact, design, fixtures};

fn main() {
    let g = fixtures::golden_mtkg();
    let plan = connect_exact(&g, &fixtures::golden_terminals(), None).expect("golden plan");
    let (arch, _) = design(&g, &plan, &DesignOptions::default()).expect("golden design");
    print!("{}", to_dot(&g, &DotOptions::default()));
    print!("{}", to_dot(&arch, &DotOptions::default()));
}
