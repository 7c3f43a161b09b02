//! CSV emission. Floats use the shortest representation that round-trips.

use std::fmt::Write as _;

use sanlab_core::{PhiAggregate, PhiReport, Tensor};

pub const HEADER: &str = "dataset,activation,m,epoch,split,W,A,cr_inv,l_tilde,phi";

pub struct Row<'a> {
    pub dataset: &'a str,
    pub activation: &'a str,
    pub m: usize,
    pub epoch: usize,
    pub split: &'a str,
}

impl Row<'_> {
    pub fn aggregate(&self, agg: &PhiAggregate) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            self.dataset,
            self.activation,
            self.m,
            self.epoch,
            self.split,
            agg.weights,
            agg.activations,
            agg.cr_inv,
            agg.l_tilde,
            agg.phi_bar
        )
    }
}

pub const EXAMPLE_HEADER: &str = "example,W,A,cr_inv,l_tilde,phi";

pub fn example_rows(reports: &[PhiReport]) -> String {
    let mut out = format!("{EXAMPLE_HEADER}\n");
    for (i, r) in reports.iter().enumerate() {
        writeln!(
            out,
            "{i},{},{},{},{},{}",
            r.weights, r.activations, r.cr_inv, r.l_tilde, r.phi
        )
        .unwrap();
    }
    out
}

/// One value per line for 1D tensors, comma-separated rows for 2D.
pub fn tensor_csv(t: &Tensor) -> String {
    let cols = *t.extents().last().unwrap_or(&1);
    let mut out = String::new();
    if t.rank() == 1 {
        for v in t.values() {
            writeln!(out, "{v}").unwrap();
        }
        return out;
    }
    for row in t.values().chunks(cols) {
        let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        writeln!(out, "{}", line.join(",")).unwrap();
    }
    out
}

/// Long format `kernel,row,col,value`; 1D kernels use row 0.
pub fn kernels_csv(kernels: &[Tensor]) -> String {
    let mut out = String::from("kernel,row,col,value\n");
    for (k, w) in kernels.iter().enumerate() {
        let cols = *w.extents().last().unwrap();
        for (i, v) in w.values().iter().enumerate() {
            writeln!(out, "{k},{},{},{v}", i / cols, i % cols).unwrap();
        }
    }
    out
}
