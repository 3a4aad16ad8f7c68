use std::fmt::Write;

use bnsl::{cover_size, CostReport, Dag};

/// One line per node: `child <- parent1 parent2 ...`.
pub fn edge_list(dag: &Dag, names: &[String]) -> String {
    let mut out = String::new();
    for (i, parents) in dag.parents().iter().enumerate() {
        out.push_str(&names[i]);
        out.push_str(" <-");
        for p in parents.iter() {
            out.push(' ');
            out.push_str(&names[p]);
        }
        out.push('\n');
    }
    out
}

fn quoted(name: &str) -> String {
    format!("\"{}\"", name.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Graphviz digraph with arcs from parent to child.
pub fn dot(dag: &Dag, names: &[String]) -> String {
    let mut out = String::from("digraph bn {\n");
    for name in names {
        let _ = writeln!(out, "  {};", quoted(name));
    }
    for (parent, child) in dag.arcs() {
        let _ = writeln!(
            out,
            "  {} -> {};",
            quoted(&names[parent]),
            quoted(&names[child])
        );
    }
    out.push_str("}\n");
    out
}

/// Charged outer queries against the `1.982^n` reference, per node count.
pub fn scaling_table(ns: &[usize], k: usize) -> bnsl::Result<String> {
    let mut out = format!(
        "{:>4} {:>14} {:>18} {:>14}\n",
        "n", "cover_size", "charged_queries", "1.982^n"
    );
    for &n in ns {
        let report = CostReport::new(n, 0, k)?;
        let _ = writeln!(
            out,
            "{:>4} {:>14} {:>18} {:>14.6e}",
            n,
            cover_size(n, k)?,
            report.charged_queries,
            report.cover_asymptotic
        );
    }
    Ok(out)
}
