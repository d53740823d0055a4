//! Dense complex matrix helpers on tensor-product spaces.
//!
//! A multipartite space is described by its slot dimensions, first slot most
//! significant (the usual Kronecker ordering).

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub fn c(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}

pub fn identity(d: usize) -> CMatrix {
    CMatrix::identity(d, d)
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn kron_all<'a, I: IntoIterator<Item = &'a CMatrix>>(factors: I) -> CMatrix {
    factors
        .into_iter()
        .fold(CMatrix::from_element(1, 1, c(1.0, 0.0)), |acc, f| acc.kronecker(f))
}

pub fn projector(v: &CVector) -> CMatrix {
    v * v.adjoint()
}

pub fn trace(m: &CMatrix) -> C64 {
    m.trace()
}

/// `tr[a b]` without forming the product.
pub fn trace_product(a: &CMatrix, b: &CMatrix) -> C64 {
    let n = a.nrows();
    let mut acc = c(0.0, 0.0);
    for i in 0..n {
        for k in 0..n {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn hermiticity_error(m: &CMatrix) -> f64 {
    max_abs_diff(m, &m.adjoint())
}

pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
pub fn eigh(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let eig = SymmetricEigen::new(hermitian_part(m));
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]).then(i.cmp(&j)));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(m.nrows(), m.ncols(), |r, k| eig.eigenvectors[(r, order[k])]);
    (values, vectors)
}

pub fn eigenvalues(m: &CMatrix) -> Vec<f64> {
    eigh(m).0
}

pub fn min_eigenvalue(m: &CMatrix) -> f64 {
    eigenvalues(m).first().copied().unwrap_or(0.0)
}

/// Sum of absolute eigenvalues of a Hermitian matrix.
pub fn trace_norm(m: &CMatrix) -> f64 {
    eigenvalues(m).iter().map(|v| v.abs()).sum()
}

pub fn frobenius_norm(m: &CMatrix) -> f64 {
    m.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

/// Rebuilds `sum_k f(lambda_k) |v_k><v_k|`.
pub fn spectral_map(m: &CMatrix, f: impl Fn(f64) -> f64) -> CMatrix {
    let (values, vectors) = eigh(m);
    let mut out = CMatrix::zeros(m.nrows(), m.ncols());
    for (k, &v) in values.iter().enumerate() {
        let w = f(v);
        if w != 0.0 {
            let col = vectors.column(k).into_owned();
            out += projector(&col).scale(w);
        }
    }
    out
}

/// Projector onto the eigenspace with eigenvalues above `threshold`.
pub fn positive_projector(m: &CMatrix, threshold: f64) -> CMatrix {
    spectral_map(m, |v| if v > threshold { 1.0 } else { 0.0 })
}

pub fn negative_projector(m: &CMatrix, threshold: f64) -> CMatrix {
    spectral_map(m, |v| if v < -threshold { 1.0 } else { 0.0 })
}

/// Matrix sign function `sum_k sign(lambda_k) |v_k><v_k|` (zero on the kernel).
pub fn sign_matrix(m: &CMatrix) -> CMatrix {
    spectral_map(m, |v| if v > 0.0 { 1.0 } else if v < 0.0 { -1.0 } else { 0.0 })
}

/// Hermitian matrix with i.i.d. Gaussian entries (GUE up to scale).
pub fn random_hermitian<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    let g = random_ginibre(d, d, rng);
    hermitian_part(&g)
}

pub fn random_ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        c(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
    })
}

pub fn random_unit_vector<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CVector {
    let v = CVector::from_fn(d, |_, _| {
        c(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
    });
    let n = v.norm();
    v / c(n, 0.0)
}

/// Mixed-radix offsets of every multi-index over `slots`, in row-major
/// order of the listed slots.
fn offsets(dims: &[usize], slots: &[usize]) -> Vec<usize> {
    let mut strides = vec![1; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * dims[k + 1];
    }
    let mut out = vec![0usize];
    for &s in slots {
        let mut next = Vec::with_capacity(out.len() * dims[s]);
        for &o in &out {
            for a in 0..dims[s] {
                next.push(o + a * strides[s]);
            }
        }
        out = next;
    }
    out
}

fn complement(n: usize, keep: &[usize]) -> Vec<usize> {
    (0..n).filter(|k| !keep.contains(k)).collect()
}

/// Partial trace over every slot not in `keep` (ascending), returning an
/// operator on the kept slots in their original order.
pub fn partial_trace_keep(op: &CMatrix, dims: &[usize], keep: &[usize]) -> CMatrix {
    debug_assert!(keep.windows(2).all(|w| w[0] < w[1]));
    let traced = complement(dims.len(), keep);
    let ok = offsets(dims, keep);
    let ot = offsets(dims, &traced);
    let dk = ok.len();
    CMatrix::from_fn(dk, dk, |i, j| {
        let (ri, rj) = (ok[i], ok[j]);
        ot.iter().map(|t| op[(ri + t, rj + t)]).sum()
    })
}

/// `tr_slot[op (I x .. x x x .. x I)]`: pairs one slot with `x` and traces it
/// out, leaving an operator on the remaining slots.
pub fn contract_slot(op: &CMatrix, dims: &[usize], slot: usize, x: &CMatrix) -> CMatrix {
    let rest = complement(dims.len(), &[slot]);
    let or = offsets(dims, &rest);
    let os = offsets(dims, &[slot]);
    let dr = or.len();
    let d = dims[slot];
    let mut out = CMatrix::zeros(dr, dr);
    for a in 0..d {
        for b in 0..d {
            let w = x[(b, a)];
            if w == c(0.0, 0.0) {
                continue;
            }
            let (oa, ob) = (os[a], os[b]);
            for j in 0..dr {
                let cj = or[j] + ob;
                for i in 0..dr {
                    out[(i, j)] += op[(or[i] + oa, cj)] * w;
                }
            }
        }
    }
    out
}

/// Contracts several slots at once; `pairs` lists `(slot, operator)` with
/// distinct slots. Returns the operator on the untouched slots.
pub fn contract_slots(op: &CMatrix, dims: &[usize], pairs: &[(usize, &CMatrix)]) -> CMatrix {
    let mut sorted: Vec<(usize, &CMatrix)> = pairs.to_vec();
    sorted.sort_by_key(|p| std::cmp::Reverse(p.0));
    let mut current = op.clone();
    let mut cur_dims = dims.to_vec();
    for (slot, x) in sorted {
        current = contract_slot(&current, &cur_dims, slot, x);
        cur_dims.remove(slot);
    }
    current
}

/// Places `op` (an operator on the slots `keep`, ascending) into the full
/// space, filling every other slot with the matching entry of `fillers`
/// (one per non-kept slot, in slot order).
pub fn embed(op: &CMatrix, dims: &[usize], keep: &[usize], fillers: &[CMatrix]) -> CMatrix {
    let traced = complement(dims.len(), keep);
    assert_eq!(traced.len(), fillers.len(), "one filler per non-kept slot");
    let ok = offsets(dims, keep);
    let ot = offsets(dims, &traced);
    let f = kron_all(fillers);
    let total: usize = dims.iter().product();
    let mut out = CMatrix::zeros(total, total);
    for ta in 0..ot.len() {
        for tb in 0..ot.len() {
            let w = f[(ta, tb)];
            if w == c(0.0, 0.0) {
                continue;
            }
            for j in 0..ok.len() {
                let cj = ok[j] + ot[tb];
                for i in 0..ok.len() {
                    out[(ok[i] + ot[ta], cj)] += op[(i, j)] * w;
                }
            }
        }
    }
    out
}

/// Like [`embed`] but adds into `out` with weight `scale`, filling every
/// other slot with `I/d` (so the result has the trace of `op`).
pub(crate) fn add_embedded_maximally_mixed(
    out: &mut CMatrix,
    op: &CMatrix,
    dims: &[usize],
    keep: &[usize],
    scale: f64,
) {
    let traced = complement(dims.len(), keep);
    let ok = offsets(dims, keep);
    let ot = offsets(dims, &traced);
    let w = scale / ot.len() as f64;
    for t in &ot {
        for j in 0..ok.len() {
            let cj = ok[j] + t;
            for i in 0..ok.len() {
                out[(ok[i] + t, cj)] += op[(i, j)] * w;
            }
        }
    }
}
