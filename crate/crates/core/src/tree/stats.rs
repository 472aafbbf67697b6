//! Purely topological statistics.

use super::OrbTree;
use crate::fmt::g17;

/// Path-length statistics of an ORB-tree `T` and of its interior tree `T̊`
/// (the internal nodes only). Depths count edges from the root.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeStats {
    pub n_leaves: usize,
    /// Sum of internal-node depths; equals the total path length of `T̊`.
    pub ipl: u64,
    /// Sum of leaf depths.
    pub epl: u64,
    pub tpl: u64,
    /// `avg(T) = 1 + TPL(T)/|T|`.
    pub avg_subtree: f64,
    /// `avg(T̊) = 1 + TPL(T̊)/|T̊|`.
    pub interior_avg_subtree: f64,
    pub height: usize,
    /// Sackin index, identical to `epl`.
    pub sackin: u64,
    /// Lower bound on the fraction of structurally vanishing entries of the
    /// wavelet-conjugated covariance matrix.
    pub zeta_lower_bound: f64,
}

pub fn tree_stats(tree: &OrbTree) -> TreeStats {
    let n = tree.n_leaves();
    let (mut ipl, mut epl, mut height) = (0u64, 0u64, 0usize);
    for v in tree.nodes() {
        let d = tree.depth(v);
        height = height.max(d);
        if tree.is_leaf(v) {
            epl += d as u64;
        } else {
            ipl += d as u64;
        }
    }
    let tpl = ipl + epl;
    let nf = n as f64;
    // (n^2 - n - 2 IPL) / n^2, with the numerator kept exact.
    let num = (n as i128) * (n as i128) - n as i128 - 2 * ipl as i128;
    let zeta = (num as f64 / (nf * nf)).clamp(0.0, 1.0);
    TreeStats {
        n_leaves: n,
        ipl,
        epl,
        tpl,
        avg_subtree: 1.0 + tpl as f64 / (2.0 * nf),
        interior_avg_subtree: 1.0 + ipl as f64 / nf,
        height,
        sackin: epl,
        zeta_lower_bound: zeta,
    }
}

impl TreeStats {
    fn fields(&self) -> [(&'static str, String); 9] {
        [
            ("n_leaves", self.n_leaves.to_string()),
            ("ipl", self.ipl.to_string()),
            ("epl", self.epl.to_string()),
            ("tpl", self.tpl.to_string()),
            ("avg_subtree", g17(self.avg_subtree)),
            ("interior_avg_subtree", g17(self.interior_avg_subtree)),
            ("height", self.height.to_string()),
            ("sackin", self.sackin.to_string()),
            ("zeta_lower_bound", g17(self.zeta_lower_bound)),
        ]
    }

    /// One `key=value` line per field.
    pub fn to_key_value(&self) -> String {
        self.fields().iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }

    /// Header row plus a single value row.
    pub fn to_tsv(&self) -> String {
        let f = self.fields();
        let head: Vec<&str> = f.iter().map(|(k, _)| *k).collect();
        let vals: Vec<&str> = f.iter().map(|(_, v)| v.as_str()).collect();
        format!("{}\n{}\n", head.join("\t"), vals.join("\t"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::{build_caterpillar, build_perfect_binary, parse_newick, NewickOptions};

    #[test]
    fn three_leaf() {
        let t = parse_newick("((1:3,2:1):0,3:2):2;", &NewickOptions::default()).unwrap();
        let s = tree_stats(&t);
        assert_eq!((s.ipl, s.epl, s.tpl, s.height), (3, 8, 11, 3));
        assert_eq!(s.interior_avg_subtree, 2.0);
        assert_eq!(s.zeta_lower_bound, 0.0);
        assert_eq!(s.epl - s.ipl, 2 * 3 - 1);
    }

    #[test]
    fn perfect_binary_interior_average() {
        for h in 1..=10 {
            let mut lengths = vec![1.0; h + 1];
            lengths[0] = 0.5;
            let t = build_perfect_binary(h, &lengths).unwrap();
            let s = tree_stats(&t);
            let expected = h as f64 + 2f64.powi(-(h as i32));
            assert!((s.interior_avg_subtree - expected).abs() < 1e-12);
        }
        let t = build_perfect_binary(10, &[1.0; 11]).unwrap();
        let s = tree_stats(&t);
        let n = 1024.0;
        let closed = 1.0 + 1.0 / n - 2.0 * (10.0 + 1.0 / n) / n;
        assert!((s.zeta_lower_bound - closed).abs() < 1e-12);
    }

    #[test]
    fn caterpillar_interior_average() {
        let h = 100;
        let t = build_caterpillar(h, &vec![1.0; h], &vec![1.0; h - 1]).unwrap();
        let s = tree_stats(&t);
        assert_eq!(s.interior_avg_subtree, (h as f64 + 1.0) / 2.0);
        assert_eq!(s.zeta_lower_bound, 0.0);
    }

    #[test]
    fn output_formats() {
        let t = parse_newick("((1:3,2:1):0,3:2):2;", &NewickOptions::default()).unwrap();
        let s = tree_stats(&t);
        let kv = s.to_key_value();
        assert!(kv.contains("ipl=3\n"));
        assert!(kv.contains("zeta_lower_bound=0\n"));
        let tsv = s.to_tsv();
        let lines: Vec<_> = tsv.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0].split('\t').count(), lines[1].split('\t').count());
    }
}
