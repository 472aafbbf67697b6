//! Uniform random ORB-tree topologies (Rémy's algorithm).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{OrbTree, RawTree, PENDANT_TOLERANCE};
use crate::{Error, Result};

/// Distribution of i.i.d. branch lengths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LengthLaw {
    /// Uniform on `(low, high]`.
    Uniform { low: f64, high: f64 },
    Exponential { rate: f64 },
    Constant(f64),
}

impl Default for LengthLaw {
    fn default() -> Self {
        LengthLaw::Uniform { low: 0.0, high: 1.0 }
    }
}

impl LengthLaw {
    fn check(&self) -> Result<()> {
        let ok = match *self {
            LengthLaw::Uniform { low, high } => low >= 0.0 && high > low && high.is_finite(),
            LengthLaw::Exponential { rate } => rate > 0.0 && rate.is_finite(),
            LengthLaw::Constant(c) => c > PENDANT_TOLERANCE && c.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::arg(format!(
                "length law {self:?} can produce nonpositive pendant lengths"
            )))
        }
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        match *self {
            LengthLaw::Uniform { low, high } => {
                let u: f64 = rng.random();
                high - (high - low) * u
            }
            LengthLaw::Exponential { rate } => {
                let u: f64 = rng.random();
                -(1.0 - u).ln() / rate
            }
            LengthLaw::Constant(c) => c,
        }
    }

    fn sample_pendant<R: Rng>(&self, rng: &mut R) -> f64 {
        loop {
            let x = self.sample(rng);
            if x > PENDANT_TOLERANCE {
                return x;
            }
        }
    }
}

impl std::str::FromStr for LengthLaw {
    type Err = Error;

    /// `uniform:LOW:HIGH`, `exp:RATE` or `const:VALUE`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |t: &str| {
            t.parse::<f64>()
                .map_err(|_| Error::arg(format!("bad number {t:?} in length law {s:?}")))
        };
        let law = match parts.as_slice() {
            ["uniform"] => LengthLaw::default(),
            ["uniform", lo, hi] => LengthLaw::Uniform {
                low: num(lo)?,
                high: num(hi)?,
            },
            ["exp", rate] => LengthLaw::Exponential { rate: num(rate)? },
            ["const", c] => LengthLaw::Constant(num(c)?),
            _ => return Err(Error::arg(format!("unknown length law {s:?}"))),
        };
        law.check()?;
        Ok(law)
    }
}

/// Topology of a uniformly random full binary tree with `n_internal - 1`
/// internal nodes, as child pairs over node ids (`None` for leaves), plus its
/// root. Built by Rémy's insertion procedure.
fn remy<R: Rng>(internal: usize, rng: &mut R) -> (Vec<Option<[usize; 2]>>, usize) {
    let total = 2 * internal + 1;
    let mut kids: Vec<Option<[usize; 2]>> = Vec::with_capacity(total);
    let mut parent: Vec<usize> = Vec::with_capacity(total);
    kids.push(None);
    parent.push(usize::MAX);
    let mut root = 0;
    for _ in 0..internal {
        let x = rng.random_range(0..kids.len());
        let leaf = kids.len();
        kids.push(None);
        parent.push(usize::MAX);
        let joint = kids.len();
        let pair = if rng.random::<bool>() { [x, leaf] } else { [leaf, x] };
        kids.push(Some(pair));
        let p = parent[x];
        parent.push(p);
        if p == usize::MAX {
            root = joint;
        } else {
            let slots = kids[p].as_mut().unwrap();
            if slots[0] == x {
                slots[0] = joint;
            } else {
                slots[1] = joint;
            }
        }
        parent[x] = joint;
        parent[leaf] = joint;
    }
    (kids, root)
}

/// Random ORB-tree with `n_internal` internal nodes (hence `n_internal`
/// leaves). The topology is uniform over full binary trees with
/// `n_internal - 1` internal nodes, with a new root appended above; branch
/// lengths are i.i.d. from `law`. Deterministic for a given seed.
pub fn random_orb_tree(n_internal: usize, seed: u64, law: &LengthLaw) -> Result<OrbTree> {
    if n_internal == 0 {
        return Err(Error::arg("random tree needs at least one internal node"));
    }
    law.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (kids, top) = remy(n_internal - 1, &mut rng);

    let mut raw = RawTree::new();
    let root = raw.add_node(None, None);
    let mut stack = vec![(top, root)];
    while let Some((v, parent)) = stack.pop() {
        match kids[v] {
            None => {
                let len = law.sample_pendant(&mut rng);
                raw.add_child(parent, None, Some(len));
            }
            Some([a, b]) => {
                let len = law.sample(&mut rng);
                let id = raw.add_child(parent, None, Some(len));
                stack.push((b, id));
                stack.push((a, id));
            }
        }
    }
    let order = raw.postorder().expect("fresh tree is acyclic");
    let mut label = 0;
    for v in order {
        if v != raw.root && raw.nodes[v].children.is_empty() {
            label += 1;
            raw.nodes[v].name = Some(label.to_string());
        }
    }
    OrbTree::from_raw(&raw)
}
