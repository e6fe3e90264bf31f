//! Dense collocation matrices of the birth and transition operators.
//!
//! The unknowns are the values `Ψ` of `ψ` at the interior nodes of every
//! sub-interval. On sub-interval `s` the discrete `ψ` is the interpolant through
//! its left value `L_s` and the local unknowns; `L_0 = 0` and `L_{s+1}` is the
//! interpolant of piece `s` evaluated at its right end, so `ψ` is continuous.
//! With `ψ'` sampled at every mesh node (matrix `G`), all integrals are
//! quadratures over those nodes:
//!
//! ```text
//! B = Pint·Kβ⁺·diag(q)·G + 1·(q∘b⁺)ᵀ·G
//! M = Gint − Pint·(diag(δ) + Kβ⁻·diag(q))·G − 1·(q∘b⁻)ᵀ·G
//! ```
//!
//! where `q` holds the global quadrature weights, `Pint` integrates from 0 to
//! each collocation node and `Gint` is `G` restricted to collocation nodes.
//! For `d > 1` each product is taken per component pair and scattered into
//! node-major blocks (index `node·d + component`).
//!
//! Coefficients are sampled one ulp inside a sub-interval at its endpoints, so
//! a jump at a breakpoint contributes the value from the piece's own side.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use faer::linalg::matmul::matmul;
use faer::{Accum, Mat, Par};

use crate::chebyshev::{differentiation_matrix, partial_integral_weights, CollocationMesh, NodeFamily};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::model::{CoefficientSet, Kernel, Rate};
use crate::quadrature::{clenshaw_curtis_rule, fejer1_rule};

#[derive(Debug, Clone)]
pub struct DiscreteOperators {
    b: Mat<f64>,
    m: Mat<f64>,
    d: usize,
    meshes: Vec<CollocationMesh>,
    /// Row `s`: left value of sub-interval `s` as a functional of the scalar unknowns.
    left: Mat<f64>,
}

impl DiscreteOperators {
    pub fn b(&self) -> &Mat<f64> {
        &self.b
    }

    pub fn m(&self) -> &Mat<f64> {
        &self.m
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn meshes(&self) -> &[CollocationMesh] {
        &self.meshes
    }

    pub fn family(&self) -> NodeFamily {
        self.meshes[0].family()
    }

    /// Matrix size `d · Σ N_s`.
    pub fn dim(&self) -> usize {
        self.b.nrows()
    }

    /// Collocation nodes in unknown order (one entry per node, not per component).
    pub fn collocation_nodes(&self) -> Vec<f64> {
        self.meshes
            .iter()
            .flat_map(|m| m.interior_nodes().iter().copied())
            .collect()
    }

    /// Weights expressing the left value of sub-interval `s` in the scalar unknowns.
    pub fn left_value_map(&self, s: usize) -> Vec<f64> {
        (0..self.left.ncols()).map(|j| self.left[(s, j)]).collect()
    }

    /// The differentiation part of `M`: `ψ'` at the collocation nodes, block form.
    pub fn differentiation(&self) -> Mat<f64> {
        let layout = Layout::new(&self.meshes).expect("meshes were validated at assembly");
        let g = layout.derivative_map(&self.left);
        let sel = layout.collocation_rows(&g);
        kron_identity(&sel, self.d)
    }
}

struct Piece {
    mesh: CollocationMesh,
    dfull: Mat<f64>,
    p: Mat<f64>,
    /// Quadrature weights on all `N + 1` nodes (zero at `a₀` for the zeros family).
    q: Vec<f64>,
    eval_offset: usize,
    unk_offset: usize,
}

struct Layout {
    pieces: Vec<Piece>,
    n: usize,
    n_eval: usize,
}

impl Layout {
    fn new(meshes: &[CollocationMesh]) -> Result<Self> {
        let mut pieces = Vec::with_capacity(meshes.len());
        let (mut n, mut n_eval) = (0, 0);
        for mesh in meshes {
            let nn = mesh.n_interior();
            let dm = differentiation_matrix(mesh);
            let p = partial_integral_weights(&dm)?.entries().clone();
            let q = match mesh.family() {
                NodeFamily::ZerosPlusLeftEndpoint => {
                    let mut q = vec![0.0];
                    q.extend(fejer1_rule(nn, mesh.interval())?.weights);
                    q
                }
                NodeFamily::Extrema => clenshaw_curtis_rule(nn, mesh.interval())?.weights,
            };
            pieces.push(Piece {
                mesh: mesh.clone(),
                dfull: dm.full().clone(),
                p,
                q,
                eval_offset: n_eval,
                unk_offset: n,
            });
            n += nn;
            n_eval += nn + 1;
        }
        Ok(Self { pieces, n, n_eval })
    }

    /// Mesh nodes with sub-interval endpoints moved one ulp inward.
    fn sample_points(&self) -> Vec<f64> {
        self.pieces
            .iter()
            .flat_map(|p| {
                let (lo, hi) = p.mesh.interval();
                p.mesh.nodes().iter().map(move |&a| {
                    if a == lo {
                        a.next_up()
                    } else if a == hi {
                        a.next_down()
                    } else {
                        a
                    }
                })
            })
            .collect()
    }

    fn weights(&self) -> Vec<f64> {
        self.pieces.iter().flat_map(|p| p.q.iter().copied()).collect()
    }

    fn left_values(&self) -> Mat<f64> {
        let mut left = Mat::<f64>::zeros(self.pieces.len(), self.n);
        for s in 1..self.pieces.len() {
            let prev = &self.pieces[s - 1];
            let ell = prev.mesh.cardinal_values(prev.mesh.interval().1);
            for j in 0..self.n {
                left[(s, j)] = left[(s - 1, j)] * ell[0];
            }
            for (j, &l) in ell.iter().enumerate().skip(1) {
                left[(s, prev.unk_offset + j - 1)] += l;
            }
        }
        left
    }

    /// `ψ'` at every mesh node as a map from the scalar unknowns.
    fn derivative_map(&self, left: &Mat<f64>) -> Mat<f64> {
        let mut g = Mat::<f64>::zeros(self.n_eval, self.n);
        for (s, pc) in self.pieces.iter().enumerate() {
            let nn = pc.mesh.n_interior();
            for k in 0..=nn {
                let e = pc.eval_offset + k;
                let d0 = pc.dfull[(k, 0)];
                if s > 0 && d0 != 0.0 {
                    for j in 0..pc.unk_offset {
                        g[(e, j)] = d0 * left[(s, j)];
                    }
                }
                for j in 1..=nn {
                    g[(e, pc.unk_offset + j - 1)] += pc.dfull[(k, j)];
                }
            }
        }
        g
    }

    /// `∫₀^{a_i}` at every collocation node as weights on the mesh nodes.
    fn partial_integrals(&self) -> Mat<f64> {
        let mut pint = Mat::<f64>::zeros(self.n, self.n_eval);
        for (s, pc) in self.pieces.iter().enumerate() {
            let nn = pc.mesh.n_interior();
            for i in 0..nn {
                let row = pc.unk_offset + i;
                for prev in &self.pieces[..s] {
                    for (k, &w) in prev.q.iter().enumerate() {
                        pint[(row, prev.eval_offset + k)] = w;
                    }
                }
                for m in 0..nn {
                    pint[(row, pc.eval_offset + 1 + m)] = pc.p[(i, m)];
                }
            }
        }
        pint
    }

    /// Rows of an evaluation-node matrix that belong to collocation nodes.
    fn collocation_rows(&self, g: &Mat<f64>) -> Mat<f64> {
        let mut rows = Vec::with_capacity(self.n);
        for pc in &self.pieces {
            rows.extend((1..=pc.mesh.n_interior()).map(|k| pc.eval_offset + k));
        }
        Mat::from_fn(self.n, g.ncols(), |i, j| g[(rows[i], j)])
    }
}

fn kron_identity(a: &Mat<f64>, d: usize) -> Mat<f64> {
    let mut out = Mat::<f64>::zeros(a.nrows() * d, a.ncols() * d);
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            for c in 0..d {
                out[(i * d + c, j * d + c)] = a[(i, j)];
            }
        }
    }
    out
}

/// Per-component samples of a rate at the mesh nodes; `None` where identically zero.
fn sample_rate(r: &Rate, nodes: &[f64]) -> Vec<Option<Vec<f64>>> {
    let d2 = r.dim() * r.dim();
    if r.is_zero() {
        return vec![None; d2];
    }
    let mut comps = vec![vec![0.0; nodes.len()]; d2];
    let mut buf = vec![0.0; d2];
    for (e, &a) in nodes.iter().enumerate() {
        r.eval_into(a, &mut buf);
        for (c, &v) in buf.iter().enumerate() {
            comps[c][e] = v;
        }
    }
    comps
        .into_iter()
        .map(|v| v.iter().any(|&x| x != 0.0).then_some(v))
        .collect()
}

/// Per-component kernel matrices `K[e, e'] = β(a_e, a_e')`; `None` where identically zero.
fn sample_kernel(k: &Kernel, nodes: &[f64], exec: Execution) -> Vec<Option<Mat<f64>>> {
    let d2 = k.dim() * k.dim();
    if k.is_zero() {
        return vec![None; d2];
    }
    let n = nodes.len();
    let rows: Vec<Vec<f64>> = exec.map(nodes, |&a| {
        let mut row = vec![0.0; n * d2];
        for (e2, &alpha) in nodes.iter().enumerate() {
            k.eval_into(a, alpha, &mut row[e2 * d2..(e2 + 1) * d2]);
        }
        row
    });
    (0..d2)
        .map(|c| {
            let active = rows.iter().any(|row| row.iter().skip(c).step_by(d2).any(|&x| x != 0.0));
            active.then(|| Mat::from_fn(n, n, |e, e2| rows[e][e2 * d2 + c]))
        })
        .collect()
}

fn check_meshes(coeffs: &CoefficientSet, meshes: &[CollocationMesh], piecewise: bool) -> Result<()> {
    coeffs.check()?;
    let Some(first) = meshes.first() else {
        return Err(Error::InvalidArgument("at least one mesh is required".into()));
    };
    let family = first.family();
    if meshes.iter().any(|m| m.family() != family) {
        return Err(Error::InvalidArgument(
            "all sub-interval meshes must use the same node family".into(),
        ));
    }
    let last = meshes.last().unwrap();
    if first.interval().0 != 0.0 || last.interval().1 != coeffs.a_dagger {
        return Err(Error::BreakpointMismatch(format!(
            "meshes cover [{}, {}], expected [0, {}]",
            first.interval().0,
            last.interval().1,
            coeffs.a_dagger
        )));
    }
    if meshes.windows(2).any(|w| w[0].interval().1 != w[1].interval().0) {
        return Err(Error::BreakpointMismatch("sub-intervals are not contiguous".into()));
    }
    if piecewise {
        for &bp in &coeffs.breakpoints {
            let on_boundary =
                bp == 0.0 || meshes.iter().any(|m| m.interval().1 == bp);
            if !on_boundary {
                return Err(Error::BreakpointMismatch(format!(
                    "coefficient breakpoint {bp} is not a sub-interval boundary"
                )));
            }
        }
    }
    Ok(())
}

/// Single-interval assembly on a mesh over `[0, a_dagger]`.
pub fn assemble(coeffs: &CoefficientSet, mesh: &CollocationMesh) -> Result<DiscreteOperators> {
    assemble_with(coeffs, std::slice::from_ref(mesh), false, Execution::default())
}

/// Assembly on contiguous sub-interval meshes partitioning `[0, a_dagger]`.
/// Every coefficient breakpoint must be a sub-interval boundary.
pub fn assemble_piecewise(coeffs: &CoefficientSet, meshes: &[CollocationMesh]) -> Result<DiscreteOperators> {
    assemble_with(coeffs, meshes, true, Execution::default())
}

/// Like [`assemble_piecewise`] (or [`assemble`] when `check_breakpoints` is
/// false) with an explicit execution mode.
pub fn assemble_with(
    coeffs: &CoefficientSet,
    meshes: &[CollocationMesh],
    check_breakpoints: bool,
    exec: Execution,
) -> Result<DiscreteOperators> {
    check_meshes(coeffs, meshes, check_breakpoints)?;
    let d = coeffs.d;
    // dense kernels stay sequential so results do not depend on the thread count
    let par = Par::Seq;
    let layout = Layout::new(meshes)?;
    let (n, ne) = (layout.n, layout.n_eval);
    let nodes = layout.sample_points();
    let q = layout.weights();
    let left = layout.left_values();
    let g = layout.derivative_map(&left);
    let pint = layout.partial_integrals();
    let g_int = layout.collocation_rows(&g);
    let qg = Mat::from_fn(ne, n, |e, j| q[e] * g[(e, j)]);

    let beta_plus = sample_kernel(&coeffs.beta_plus, &nodes, exec);
    let beta_minus = sample_kernel(&coeffs.beta_minus, &nodes, exec);
    let b_plus = sample_rate(&coeffs.b_plus, &nodes);
    let b_minus = sample_rate(&coeffs.b_minus, &nodes);
    let delta = sample_rate(&coeffs.delta, &nodes);

    // boundary terms: (q∘b)ᵀ G, one row shared by every collocation node
    let boundary_row = |samples: &Option<Vec<f64>>| -> Option<Vec<f64>> {
        samples.as_ref().map(|b| {
            (0..n)
                .map(|j| (0..ne).map(|e| b[e] * qg[(e, j)]).sum())
                .collect()
        })
    };

    let pairs: Vec<usize> = (0..d * d).collect();
    let blocks: Vec<(Mat<f64>, Mat<f64>)> = exec.map(&pairs, |&rc| {
        let (r, c) = (rc / d, rc % d);
        let mut bb = Mat::<f64>::zeros(n, n);
        let mut mb = if r == c { g_int.clone() } else { Mat::<f64>::zeros(n, n) };

        if let Some(k) = &beta_plus[rc] {
            let mut inner = Mat::<f64>::zeros(ne, n);
            matmul(inner.as_mut(), Accum::Replace, k.as_ref(), qg.as_ref(), 1.0, par);
            matmul(bb.as_mut(), Accum::Add, pint.as_ref(), inner.as_ref(), 1.0, par);
        }
        if let Some(w) = boundary_row(&b_plus[rc]) {
            for j in 0..n {
                for i in 0..n {
                    bb[(i, j)] += w[j];
                }
            }
        }

        let has_delta = delta[rc].is_some();
        if has_delta || beta_minus[rc].is_some() {
            let mut inner = match &delta[rc] {
                Some(dl) => Mat::from_fn(ne, n, |e, j| dl[e] * g[(e, j)]),
                None => Mat::<f64>::zeros(ne, n),
            };
            if let Some(k) = &beta_minus[rc] {
                matmul(inner.as_mut(), Accum::Add, k.as_ref(), qg.as_ref(), 1.0, par);
            }
            matmul(mb.as_mut(), Accum::Add, pint.as_ref(), inner.as_ref(), -1.0, par);
        }
        if let Some(w) = boundary_row(&b_minus[rc]) {
            for j in 0..n {
                for i in 0..n {
                    mb[(i, j)] -= w[j];
                }
            }
        }
        (bb, mb)
    });

    let mut b = Mat::<f64>::zeros(n * d, n * d);
    let mut m = Mat::<f64>::zeros(n * d, n * d);
    for (rc, (bb, mb)) in blocks.iter().enumerate() {
        let (r, c) = (rc / d, rc % d);
        for v in 0..n {
            for u in 0..n {
                b[(u * d + r, v * d + c)] = bb[(u, v)];
                m[(u * d + r, v * d + c)] = mb[(u, v)];
            }
        }
    }
    log::debug!(
        "assembled {} sub-interval(s), d = {d}, matrix size {}",
        meshes.len(),
        n * d
    );
    Ok(DiscreteOperators {
        b,
        m,
        d,
        meshes: meshes.to_vec(),
        left,
    })
}

/// One mesh of `n` interior nodes per sub-interval between consecutive `boundaries`.
pub fn meshes_on(family: NodeFamily, n: usize, boundaries: &[f64]) -> Result<Vec<CollocationMesh>> {
    if boundaries.len() < 2 {
        return Err(Error::InvalidArgument("need at least two boundaries".into()));
    }
    boundaries
        .windows(2)
        .map(|w| CollocationMesh::new(family, n, (w[0], w[1])))
        .collect()
}

/// Row-major CSV with 17 significant digits.
pub fn matrix_to_csv(m: &Mat<f64>) -> String {
    let mut s = String::new();
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if j > 0 {
                s.push(',');
            }
            write!(s, "{:.16e}", m[(i, j)]).unwrap();
        }
        s.push('\n');
    }
    s
}

pub fn write_matrix_csv(path: &Path, m: &Mat<f64>) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    f.write_all(matrix_to_csv(m).as_bytes())?;
    f.flush()?;
    Ok(())
}

pub fn parse_matrix_csv(text: &str) -> Result<Mat<f64>> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::MatrixFormat(format!("line {}: bad number `{}`", ln + 1, t.trim())))
            })
            .collect::<Result<Vec<f64>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(Error::MatrixFormat(format!(
                    "line {}: {} columns, expected {}",
                    ln + 1,
                    row.len(),
                    first.len()
                )));
            }
        }
        rows.push(row);
    }
    let ncols = rows.first().map_or(0, Vec::len);
    Ok(Mat::from_fn(rows.len(), ncols, |i, j| rows[i][j]))
}

pub fn read_matrix_csv(path: &Path) -> Result<Mat<f64>> {
    parse_matrix_csv(&std::fs::read_to_string(path)?)
}

/// Writes `B.csv`, `M.csv` and `nodes.csv` (one collocation node per line) into `dir`.
pub fn dump_matrices(ops: &DiscreteOperators, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    write_matrix_csv(&dir.join("B.csv"), ops.b())?;
    write_matrix_csv(&dir.join("M.csv"), ops.m())?;
    let mut s = String::new();
    for a in ops.collocation_nodes() {
        writeln!(s, "{a:.16e}").unwrap();
    }
    std::fs::write(dir.join("nodes.csv"), s)?;
    Ok(())
}
