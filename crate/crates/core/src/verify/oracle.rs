//! Reference computations written from the definitions with dense matrices
//! and explicit loops. Nothing here calls into the calculus kernels.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::VerifyError;
use crate::calculus::{CalculusError, ExtensionMode, OperatorContext};
use crate::graph::{Domain, GraphError, VertexFunction, VertexId};
use crate::variational::FreeSpace;

struct Dense {
    w: Vec<Vec<f64>>,
    meas: Vec<f64>,
    in_omega: Vec<bool>,
    /// Vertices a sum may visit.
    visible: Vec<bool>,
}

impl Dense {
    fn new(domain: &Domain, mode: ExtensionMode) -> Self {
        let graph = domain.graph();
        let n = graph.vertex_count();
        let mut w = vec![vec![0.0; n]; n];
        for (x, row) in w.iter_mut().enumerate() {
            for &(y, wxy) in graph.neighbors(x) {
                row[y] = wxy;
            }
        }
        let meas = w.iter().map(|row| row.iter().sum()).collect();
        let in_omega: Vec<bool> = (0..n).map(|x| domain.contains_index(x)).collect();
        let visible = match mode {
            ExtensionMode::ZeroExtend => vec![true; n],
            ExtensionMode::RestrictToOmega => in_omega.clone(),
        };
        Self {
            w,
            meas,
            in_omega,
            visible,
        }
    }

    fn n(&self) -> usize {
        self.w.len()
    }

    fn laplace(&self, v: &[f64]) -> Vec<f64> {
        let n = self.n();
        let mut out = vec![0.0; n];
        for x in 0..n {
            if !self.visible[x] {
                continue;
            }
            let mut acc = 0.0;
            for y in 0..n {
                if self.visible[y] && self.w[x][y] > 0.0 {
                    acc += self.w[x][y] * (v[y] - v[x]);
                }
            }
            out[x] = acc / self.meas[x];
        }
        out
    }

    fn laplace_power(&self, v: &[f64], k: usize) -> Vec<f64> {
        let mut cur = v.to_vec();
        for _ in 0..k {
            cur = self.laplace(&cur);
        }
        cur
    }

    fn carre(&self, a: &[f64], b: &[f64], x: usize) -> f64 {
        let mut acc = 0.0;
        for y in 0..self.n() {
            if self.visible[y] && self.w[x][y] > 0.0 {
                acc += self.w[x][y] * (a[y] - a[x]) * (b[y] - b[x]);
            }
        }
        acc / (2.0 * self.meas[x])
    }
}

fn weight_power(s: f64, p: f64) -> f64 {
    if p == 2.0 {
        1.0
    } else if s == 0.0 {
        0.0
    } else {
        s.powf(p - 2.0)
    }
}

/// `L_{m,p}u(x)` recomputed by literal summation: the bilinear form
/// `Σ_{z∈Ω} m(z) |∇^m u|^{p−2}(z) ⟨∇^m u, ∇^m e_x⟩(z)` divided by `m(x)`.
pub fn oracle_mp_laplacian(
    ctx: &OperatorContext,
    u: &VertexFunction,
    m: usize,
    p: f64,
    x: VertexId,
) -> Result<f64, VerifyError> {
    if m == 0 {
        return Err(CalculusError::InvalidOrder.into());
    }
    if !(p > 1.0 && p.is_finite()) {
        return Err(CalculusError::InvalidExponent(p).into());
    }
    let domain = ctx.domain();
    let graph = domain.graph();
    let xi = graph.index_of(x).ok_or(GraphError::UnknownVertex(x))?;
    if !domain.contains_index(xi) {
        return Err(CalculusError::OutsideDomain(x).into());
    }
    if domain.boundary_indices().contains(&xi) {
        return Err(CalculusError::InteriorOnly(x).into());
    }
    let dense = Dense::new(domain, ctx.mode());
    let n = dense.n();
    let mut uu = vec![0.0; n];
    for (z, slot) in uu.iter_mut().enumerate() {
        if dense.in_omega[z] {
            let id = graph.id(z);
            *slot = u.get(id).ok_or(GraphError::MissingValue(id))?;
        }
    }
    let mut e = vec![0.0; n];
    e[xi] = 1.0;
    let k = m / 2;
    let lu = dense.laplace_power(&uu, k);
    let le = dense.laplace_power(&e, k);
    let mut total = 0.0;
    for z in 0..n {
        if !dense.in_omega[z] {
            continue;
        }
        let term = if m % 2 == 1 {
            let s = dense.carre(&lu, &lu, z).max(0.0).sqrt();
            weight_power(s, p) * dense.carre(&lu, &le, z)
        } else {
            weight_power(lu[z].abs(), p) * lu[z] * le[z]
        };
        total += dense.meas[z] * term;
    }
    Ok(total / dense.meas[xi])
}

/// Lower bound for the embedding constant: the largest ratio
/// `‖u‖_q / ‖∇^m u‖_p` over `samples` random admissible `u`.
///
/// Directions are random combinations of a basis of `W^{m,p}_0(Ω)`, with
/// a quarter of them single basis vectors. Norms are computed by literal
/// summation.
pub fn oracle_sobolev_constant(
    domain: &Domain,
    m: usize,
    p: f64,
    q: f64,
    samples: usize,
    seed: u64,
) -> Result<f64, VerifyError> {
    if m == 0 || !(p >= 1.0) || !(q >= 1.0) {
        return Err(VerifyError::InvalidParameters(format!("need m ≥ 1, p, q ≥ 1; got m={m}, p={p}, q={q}")));
    }
    let ctx = OperatorContext::zero_extend(domain.clone());
    let space = FreeSpace::new(&ctx, m)?;
    let dense = Dense::new(domain, ExtensionMode::ZeroExtend);
    let n = dense.n();
    let basis: Vec<Vec<f64>> = (0..space.dim()).map(|j| space.basis_vector(j)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = 0.0_f64;
    for s in 0..samples {
        let mut u = vec![0.0; n];
        if s % 4 == 3 {
            u.clone_from(&basis[rng.random_range(0..basis.len())]);
        } else {
            for phi in &basis {
                let c: f64 = rng.random_range(-1.0..1.0);
                for z in 0..n {
                    u[z] += c * phi[z];
                }
            }
        }
        let lifted = dense.laplace_power(&u, m / 2);
        let mut top = 0.0_f64;
        let mut bottom = 0.0_f64;
        for z in 0..n {
            if !dense.in_omega[z] {
                continue;
            }
            let slope = if m % 2 == 1 {
                dense.carre(&lifted, &lifted, z).max(0.0).sqrt()
            } else {
                lifted[z].abs()
            };
            bottom += dense.meas[z] * slope.powf(p);
            if q.is_infinite() {
                top = top.max(u[z].abs());
            } else {
                top += dense.meas[z] * u[z].abs().powf(q);
            }
        }
        if !q.is_infinite() {
            top = top.powf(1.0 / q);
        }
        let bottom = bottom.powf(1.0 / p);
        if bottom > 0.0 && top > 0.0 {
            best = best.max(top / bottom);
        }
    }
    Ok(best)
}
