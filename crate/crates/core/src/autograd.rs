//! Dense matrices, a small reverse-mode tape and the Adam optimizer.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::rng::SeededRng;
use crate::{math, Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{} values cannot fill a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    /// Stacks equal-length rows; `cols` is used when `rows` is empty.
    pub fn from_rows(rows: &[Vec<f64>], cols: usize) -> Result<Self> {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(Error::LengthMismatch {
                    left: r.len(),
                    right: cols,
                });
            }
            data.extend_from_slice(r);
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn column(data: Vec<f64>) -> Self {
        Self {
            rows: data.len(),
            cols: 1,
            data,
        }
    }

    pub fn normal(rows: usize, cols: usize, std: f64, rng: &mut SeededRng) -> Self {
        let data = (0..rows * cols).map(|_| rng.normal() * std).collect();
        Self { rows, cols, data }
    }

    /// Glorot-uniform initialization.
    pub fn glorot(rows: usize, cols: usize, rng: &mut SeededRng) -> Self {
        let bound = math::sqrt(6.0 / (rows + cols) as f64);
        let data = (0..rows * cols)
            .map(|_| rng.uniform_range(-bound, bound))
            .collect();
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn fill(&mut self, v: f64) {
        self.data.iter_mut().for_each(|x| *x = v);
    }

    pub fn transpose(&self) -> Matrix {
        let mut out = Matrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.data[c * self.rows + r] = self.data[r * self.cols + c];
            }
        }
        out
    }

    /// `self * other`.
    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "matmul inner dimension");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let o = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for (k, &a) in self.row(i).iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                for (x, &b) in o.iter_mut().zip(other.row(k)) {
                    *x += a * b;
                }
            }
        }
        out
    }

    /// `self^T * other`.
    pub fn matmul_tn(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.rows, other.rows, "matmul_tn inner dimension");
        let mut out = Matrix::zeros(self.cols, other.cols);
        for k in 0..self.rows {
            let b = other.row(k);
            for (i, &a) in self.row(k).iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                let o = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (x, &bv) in o.iter_mut().zip(b) {
                    *x += a * bv;
                }
            }
        }
        out
    }

    /// `self * other^T`.
    pub fn matmul_nt(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.cols, "matmul_nt inner dimension");
        let mut out = Matrix::zeros(self.rows, other.rows);
        for i in 0..self.rows {
            let a = self.row(i);
            for j in 0..other.rows {
                out.data[i * other.rows + j] = math::dot(a, other.row(j));
            }
        }
        out
    }

    pub fn add_assign(&mut self, other: &Matrix) {
        assert_eq!(self.shape(), other.shape(), "add_assign shape");
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
    }

    pub fn scaled(&self, s: f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x * s).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Var(usize);

#[derive(Debug, Clone)]
enum Op {
    Leaf,
    MatMul(Var, Var),
    Add(Var, Var),
    AddRow(Var, Var),
    AddConst(Var),
    Scale(Var, f64),
    LeakyRelu(Var, f64),
    Relu(Var),
    GatherRows(Var, Vec<usize>),
    ScatterAddRows(Var, Vec<usize>),
    ConcatCols(Vec<Var>),
    SliceCols(Var, usize),
    SegmentSoftmax(Var, Vec<usize>),
    ScaleRows(Var, Var),
    MaskRows(Var, Vec<bool>),
    RowDot(Var, Var),
    BceWithLogits(Var, Vec<f64>),
}

#[derive(Debug, Clone)]
struct Node {
    value: Matrix,
    op: Op,
}

/// Records operations for one forward pass; `backward` returns gradients of
/// every recorded node.
#[derive(Debug, Default)]
pub struct Tape {
    nodes: Vec<Node>,
}

fn shape_err(what: &str, a: (usize, usize), b: (usize, usize)) -> Error {
    Error::Shape(format!("{what}: {}x{} vs {}x{}", a.0, a.1, b.0, b.1))
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn push(&mut self, value: Matrix, op: Op) -> Var {
        self.nodes.push(Node { value, op });
        Var(self.nodes.len() - 1)
    }

    pub fn value(&self, v: Var) -> &Matrix {
        &self.nodes[v.0].value
    }

    pub fn leaf(&mut self, m: Matrix) -> Var {
        self.push(m, Op::Leaf)
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        let (x, y) = (self.value(a), self.value(b));
        if x.cols != y.rows {
            return Err(shape_err("matmul", x.shape(), y.shape()));
        }
        let v = x.matmul(y);
        Ok(self.push(v, Op::MatMul(a, b)))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        let (x, y) = (self.value(a), self.value(b));
        if x.shape() != y.shape() {
            return Err(shape_err("add", x.shape(), y.shape()));
        }
        let mut v = x.clone();
        v.add_assign(y);
        Ok(self.push(v, Op::Add(a, b)))
    }

    /// Adds a `1 x cols` row to every row of `a`.
    pub fn add_row(&mut self, a: Var, row: Var) -> Result<Var> {
        let (x, r) = (self.value(a), self.value(row));
        if r.rows != 1 || r.cols != x.cols {
            return Err(shape_err("add_row", x.shape(), r.shape()));
        }
        let mut v = x.clone();
        for i in 0..v.rows {
            for (o, b) in v.row_mut(i).iter_mut().zip(&r.data) {
                *o += b;
            }
        }
        Ok(self.push(v, Op::AddRow(a, row)))
    }

    /// Adds a constant matrix (no gradient flows to it).
    pub fn add_const(&mut self, a: Var, c: &Matrix) -> Result<Var> {
        let x = self.value(a);
        if x.shape() != c.shape() {
            return Err(shape_err("add_const", x.shape(), c.shape()));
        }
        let mut v = x.clone();
        v.add_assign(c);
        Ok(self.push(v, Op::AddConst(a)))
    }

    pub fn scale(&mut self, a: Var, s: f64) -> Var {
        let v = self.value(a).scaled(s);
        self.push(v, Op::Scale(a, s))
    }

    pub fn leaky_relu(&mut self, a: Var, slope: f64) -> Var {
        let mut v = self.value(a).clone();
        v.data.iter_mut().for_each(|x| {
            if *x < 0.0 {
                *x *= slope
            }
        });
        self.push(v, Op::LeakyRelu(a, slope))
    }

    pub fn relu(&mut self, a: Var) -> Var {
        let mut v = self.value(a).clone();
        v.data.iter_mut().for_each(|x| *x = x.max(0.0));
        self.push(v, Op::Relu(a))
    }

    pub fn gather_rows(&mut self, a: Var, idx: &[usize]) -> Result<Var> {
        let x = self.value(a);
        let mut v = Matrix::zeros(idx.len(), x.cols);
        for (o, &i) in idx.iter().enumerate() {
            if i >= x.rows {
                return Err(Error::Shape(format!("gather row {i} of {}", x.rows)));
            }
            v.row_mut(o).copy_from_slice(x.row(i));
        }
        Ok(self.push(v, Op::GatherRows(a, idx.to_vec())))
    }

    /// Sums row `r` of `a` into output row `idx[r]` of an `n x cols` result.
    pub fn scatter_add_rows(&mut self, a: Var, idx: &[usize], n: usize) -> Result<Var> {
        let x = self.value(a);
        if idx.len() != x.rows {
            return Err(Error::LengthMismatch {
                left: idx.len(),
                right: x.rows,
            });
        }
        let mut v = Matrix::zeros(n, x.cols);
        for (r, &t) in idx.iter().enumerate() {
            if t >= n {
                return Err(Error::Shape(format!("scatter row {t} of {n}")));
            }
            for (o, s) in v.row_mut(t).iter_mut().zip(x.row(r)) {
                *o += s;
            }
        }
        Ok(self.push(v, Op::ScatterAddRows(a, idx.to_vec())))
    }

    pub fn concat_cols(&mut self, parts: &[Var]) -> Result<Var> {
        let rows = parts.first().map_or(0, |p| self.value(*p).rows);
        if parts.iter().any(|p| self.value(*p).rows != rows) {
            return Err(Error::Shape("concat_cols row counts differ".into()));
        }
        let cols: usize = parts.iter().map(|p| self.value(*p).cols).sum();
        let mut v = Matrix::zeros(rows, cols);
        for r in 0..rows {
            let mut off = 0;
            for p in parts {
                let src = self.value(*p).row(r);
                v.data[r * cols + off..r * cols + off + src.len()].copy_from_slice(src);
                off += src.len();
            }
        }
        Ok(self.push(v, Op::ConcatCols(parts.to_vec())))
    }

    pub fn slice_cols(&mut self, a: Var, start: usize, end: usize) -> Result<Var> {
        let x = self.value(a);
        if start > end || end > x.cols {
            return Err(Error::Shape(format!("slice {start}..{end} of {} columns", x.cols)));
        }
        let mut v = Matrix::zeros(x.rows, end - start);
        for r in 0..x.rows {
            v.row_mut(r).copy_from_slice(&x.row(r)[start..end]);
        }
        Ok(self.push(v, Op::SliceCols(a, start)))
    }

    /// Softmax of a column vector within groups given by `segment`.
    pub fn segment_softmax(&mut self, a: Var, segment: &[usize]) -> Result<Var> {
        let x = self.value(a);
        if x.cols != 1 || segment.len() != x.rows {
            return Err(Error::Shape("segment_softmax expects one score per edge".into()));
        }
        let n = segment.iter().map(|s| s + 1).max().unwrap_or(0);
        let mut max = vec![f64::NEG_INFINITY; n];
        for (&s, &z) in segment.iter().zip(&x.data) {
            max[s] = max[s].max(z);
        }
        let mut e: Vec<f64> = segment
            .iter()
            .zip(&x.data)
            .map(|(&s, &z)| math::exp(z - max[s]))
            .collect();
        let mut sum = vec![0.0; n];
        for (&s, &v) in segment.iter().zip(&e) {
            sum[s] += v;
        }
        for (&s, v) in segment.iter().zip(e.iter_mut()) {
            *v /= sum[s];
        }
        Ok(self.push(Matrix::column(e), Op::SegmentSoftmax(a, segment.to_vec())))
    }

    /// Multiplies row `r` of `a` by `s[r]` where `s` is a column vector.
    pub fn scale_rows(&mut self, a: Var, s: Var) -> Result<Var> {
        let (x, w) = (self.value(a), self.value(s));
        if w.cols != 1 || w.rows != x.rows {
            return Err(shape_err("scale_rows", x.shape(), w.shape()));
        }
        let mut v = x.clone();
        for r in 0..v.rows {
            let f = w.data[r];
            v.row_mut(r).iter_mut().for_each(|x| *x *= f);
        }
        Ok(self.push(v, Op::ScaleRows(a, s)))
    }

    /// Zeroes rows where `keep` is false.
    pub fn mask_rows(&mut self, a: Var, keep: &[bool]) -> Result<Var> {
        let x = self.value(a);
        if keep.len() != x.rows {
            return Err(Error::LengthMismatch {
                left: keep.len(),
                right: x.rows,
            });
        }
        let mut v = x.clone();
        for (r, &k) in keep.iter().enumerate() {
            if !k {
                v.row_mut(r).fill(0.0);
            }
        }
        Ok(self.push(v, Op::MaskRows(a, keep.to_vec())))
    }

    /// Row-wise dot products as a column vector.
    pub fn row_dot(&mut self, a: Var, b: Var) -> Result<Var> {
        let (x, y) = (self.value(a), self.value(b));
        if x.shape() != y.shape() {
            return Err(shape_err("row_dot", x.shape(), y.shape()));
        }
        let v = (0..x.rows).map(|r| math::dot(x.row(r), y.row(r))).collect();
        Ok(self.push(Matrix::column(v), Op::RowDot(a, b)))
    }

    /// Mean binary cross-entropy of logits against 0/1 targets, as a 1x1 node.
    pub fn bce_with_logits(&mut self, logits: Var, targets: &[f64]) -> Result<Var> {
        let x = self.value(logits);
        if x.cols != 1 || x.rows != targets.len() || targets.is_empty() {
            return Err(Error::Shape("bce expects one logit per target".into()));
        }
        let loss: f64 = x
            .data
            .iter()
            .zip(targets)
            .map(|(&z, &y)| math::softplus(z) - y * z)
            .sum::<f64>()
            / targets.len() as f64;
        Ok(self.push(Matrix::column(vec![loss]), Op::BceWithLogits(logits, targets.to_vec())))
    }

    /// Gradients of a scalar node.
    pub fn backward(&self, root: Var) -> Gradients {
        let seed = Matrix::column(vec![1.0]);
        self.backward_with(root, seed)
    }

    /// Gradients given an upstream gradient for `root`.
    pub fn backward_with(&self, root: Var, seed: Matrix) -> Gradients {
        assert_eq!(seed.shape(), self.value(root).shape(), "seed shape");
        let mut grads: Vec<Option<Matrix>> = vec![None; root.0 + 1];
        grads[root.0] = Some(seed);
        for i in (0..=root.0).rev() {
            let Some(g) = grads[i].take() else { continue };
            self.propagate(i, &g, &mut grads);
            grads[i] = Some(g);
        }
        Gradients(grads)
    }

    fn propagate(&self, i: usize, g: &Matrix, grads: &mut [Option<Matrix>]) {
        fn acc(grads: &mut [Option<Matrix>], v: Var, d: Matrix) {
            match &mut grads[v.0] {
                Some(x) => x.add_assign(&d),
                slot => *slot = Some(d),
            }
        }
        let node = &self.nodes[i];
        match &node.op {
            Op::Leaf => {}
            Op::MatMul(a, b) => {
                let da = g.matmul_nt(self.value(*b));
                let db = self.value(*a).matmul_tn(g);
                acc(grads, *a, da);
                acc(grads, *b, db);
            }
            Op::Add(a, b) => {
                acc(grads, *a, g.clone());
                acc(grads, *b, g.clone());
            }
            Op::AddRow(a, r) => {
                let mut dr = Matrix::zeros(1, g.cols);
                for row in 0..g.rows {
                    for (o, x) in dr.data.iter_mut().zip(g.row(row)) {
                        *o += x;
                    }
                }
                acc(grads, *a, g.clone());
                acc(grads, *r, dr);
            }
            Op::AddConst(a) => acc(grads, *a, g.clone()),
            Op::Scale(a, s) => acc(grads, *a, g.scaled(*s)),
            Op::LeakyRelu(a, slope) => {
                let x = self.value(*a);
                let mut d = g.clone();
                for (o, &xv) in d.data.iter_mut().zip(&x.data) {
                    if xv < 0.0 {
                        *o *= slope;
                    }
                }
                acc(grads, *a, d);
            }
            Op::Relu(a) => {
                let x = self.value(*a);
                let mut d = g.clone();
                for (o, &xv) in d.data.iter_mut().zip(&x.data) {
                    if xv <= 0.0 {
                        *o = 0.0;
                    }
                }
                acc(grads, *a, d);
            }
            Op::GatherRows(a, idx) => {
                let x = self.value(*a);
                let mut d = Matrix::zeros(x.rows, x.cols);
                for (r, &src) in idx.iter().enumerate() {
                    for (o, v) in d.row_mut(src).iter_mut().zip(g.row(r)) {
                        *o += v;
                    }
                }
                acc(grads, *a, d);
            }
            Op::ScatterAddRows(a, idx) => {
                let x = self.value(*a);
                let mut d = Matrix::zeros(x.rows, x.cols);
                for (r, &t) in idx.iter().enumerate() {
                    d.row_mut(r).copy_from_slice(g.row(t));
                }
                acc(grads, *a, d);
            }
            Op::ConcatCols(parts) => {
                let mut off = 0;
                for p in parts {
                    let c = self.value(*p).cols;
                    let mut d = Matrix::zeros(g.rows, c);
                    for r in 0..g.rows {
                        d.row_mut(r).copy_from_slice(&g.row(r)[off..off + c]);
                    }
                    off += c;
                    acc(grads, *p, d);
                }
            }
            Op::SliceCols(a, start) => {
                let x = self.value(*a);
                let mut d = Matrix::zeros(x.rows, x.cols);
                for r in 0..x.rows {
                    d.row_mut(r)[*start..*start + g.cols].copy_from_slice(g.row(r));
                }
                acc(grads, *a, d);
            }
            Op::SegmentSoftmax(a, seg) => {
                let y = &node.value;
                let n = seg.iter().map(|s| s + 1).max().unwrap_or(0);
                let mut inner = vec![0.0; n];
                for ((&s, &yv), &gv) in seg.iter().zip(&y.data).zip(&g.data) {
                    inner[s] += yv * gv;
                }
                let d = seg
                    .iter()
                    .zip(&y.data)
                    .zip(&g.data)
                    .map(|((&s, &yv), &gv)| yv * (gv - inner[s]))
                    .collect();
                acc(grads, *a, Matrix::column(d));
            }
            Op::ScaleRows(a, s) => {
                let (x, w) = (self.value(*a), self.value(*s));
                let mut da = g.clone();
                let mut ds = Matrix::zeros(w.rows, 1);
                for r in 0..g.rows {
                    ds.data[r] = math::dot(g.row(r), x.row(r));
                    let f = w.data[r];
                    da.row_mut(r).iter_mut().for_each(|v| *v *= f);
                }
                acc(grads, *a, da);
                acc(grads, *s, ds);
            }
            Op::MaskRows(a, keep) => {
                let mut d = g.clone();
                for (r, &k) in keep.iter().enumerate() {
                    if !k {
                        d.row_mut(r).fill(0.0);
                    }
                }
                acc(grads, *a, d);
            }
            Op::RowDot(a, b) => {
                let (x, y) = (self.value(*a), self.value(*b));
                let mut da = y.clone();
                let mut db = x.clone();
                for r in 0..g.rows {
                    let f = g.data[r];
                    da.row_mut(r).iter_mut().for_each(|v| *v *= f);
                    db.row_mut(r).iter_mut().for_each(|v| *v *= f);
                }
                acc(grads, *a, da);
                acc(grads, *b, db);
            }
            Op::BceWithLogits(a, t) => {
                let x = self.value(*a);
                let scale = g.data[0] / t.len() as f64;
                let d = x
                    .data
                    .iter()
                    .zip(t)
                    .map(|(&z, &y)| (math::sigmoid(z) - y) * scale)
                    .collect();
                acc(grads, *a, Matrix::column(d));
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct Gradients(Vec<Option<Matrix>>);

impl Gradients {
    /// `None` when the node does not influence the root.
    pub fn get(&self, v: Var) -> Option<&Matrix> {
        self.0.get(v.0).and_then(Option::as_ref)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

impl AdamConfig {
    pub fn with_lr(lr: f64) -> Self {
        Self {
            lr,
            ..Self::default()
        }
    }
}

/// Adam with one moment slot per parameter tensor.
#[derive(Debug, Clone)]
pub struct Adam {
    cfg: AdamConfig,
    t: i32,
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
}

impl Adam {
    pub fn new(cfg: AdamConfig, sizes: &[usize]) -> Self {
        Self {
            cfg,
            t: 0,
            m: sizes.iter().map(|&n| vec![0.0; n]).collect(),
            v: sizes.iter().map(|&n| vec![0.0; n]).collect(),
        }
    }

    pub fn steps(&self) -> i32 {
        self.t
    }

    /// Starts a new step; call once before the `update`s of that step.
    pub fn begin_step(&mut self) {
        self.t += 1;
    }

    pub fn update(&mut self, slot: usize, param: &mut [f64], grad: &[f64]) {
        let c = self.cfg;
        let b1 = 1.0 - math::powf(c.beta1, self.t as f64);
        let b2 = 1.0 - math::powf(c.beta2, self.t as f64);
        let (m, v) = (&mut self.m[slot], &mut self.v[slot]);
        for i in 0..param.len() {
            let g = grad[i];
            m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * g;
            v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * g * g;
            let mh = m[i] / b1;
            let vh = v[i] / b2;
            param[i] -= c.lr * mh / (math::sqrt(vh) + c.eps);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rand(rows: usize, cols: usize, seed: u64) -> Matrix {
        Matrix::normal(rows, cols, 1.0, &mut SeededRng::new(seed))
    }

    /// Central finite differences of `f` at leaf `x`.
    fn check(x0: &Matrix, f: &dyn Fn(&mut Tape, Var) -> Var) {
        let mut tape = Tape::new();
        let x = tape.leaf(x0.clone());
        let out = f(&mut tape, x);
        let g = tape.backward(out);
        let analytic = g.get(x).cloned().unwrap_or(Matrix::zeros(x0.rows, x0.cols));
        let h = 1e-6;
        for i in 0..x0.data.len() {
            let eval = |d: f64| {
                let mut p = x0.clone();
                p.data[i] += d;
                let mut t = Tape::new();
                let v = t.leaf(p);
                let o = f(&mut t, v);
                t.value(o).data[0]
            };
            let num = (eval(h) - eval(-h)) / (2.0 * h);
            let a = analytic.data[i];
            assert!(
                (a - num).abs() <= 1e-6 + 1e-5 * num.abs().max(a.abs()),
                "coordinate {i}: analytic {a} numeric {num}"
            );
        }
    }

    #[test]
    fn matmul_variants_agree() {
        let a = rand(3, 4, 1);
        let b = rand(4, 2, 2);
        let c = a.matmul(&b);
        let tn = a.transpose().matmul_tn(&b);
        let nt = a.matmul_nt(&b.transpose());
        for i in 0..c.data.len() {
            assert!((c.data[i] - tn.data[i]).abs() < 1e-12);
            assert!((c.data[i] - nt.data[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn attention_block_gradient() {
        let w = rand(3, 2, 3);
        let edge_src = [0usize, 1, 2, 2, 3];
        let edge_dst = [0usize, 0, 1, 2, 2];
        check(&rand(4, 3, 4), &|t, x| {
            let wv = t.leaf(w.clone());
            let h = t.matmul(x, wv).unwrap();
            let hs = t.gather_rows(h, &edge_src).unwrap();
            let z = t.slice_cols(hs, 0, 1).unwrap();
            let z = t.leaky_relu(z, 0.2);
            let a = t.segment_softmax(z, &edge_dst).unwrap();
            let m = t.scale_rows(hs, a).unwrap();
            let u = t.scatter_add_rows(m, &edge_dst, 3).unwrap();
            let u = t.relu(u);
            let c = t.concat_cols(&[u, u]).unwrap();
            let c = t.mask_rows(c, &[true, false, true]).unwrap();
            let d = t.row_dot(c, c).unwrap();
            let d = t.scale(d, 0.1);
            t.bce_with_logits(d, &[1.0, 0.0, 1.0]).unwrap()
        });
    }

    #[test]
    fn bias_and_add_gradient() {
        let b0 = rand(1, 3, 5);
        let k = rand(2, 3, 6);
        check(&rand(2, 3, 7), &|t, x| {
            let b = t.leaf(b0.clone());
            let y = t.add_row(x, b).unwrap();
            let y = t.add(y, x).unwrap();
            let y = t.add_const(y, &k).unwrap();
            let s = t.row_dot(y, x).unwrap();
            t.bce_with_logits(s, &[0.0, 1.0]).unwrap()
        });
    }

    #[test]
    fn softmax_segments_sum_to_one() {
        let mut t = Tape::new();
        let z = t.leaf(Matrix::column(vec![1.0, 2.0, 3.0, 800.0, -800.0]));
        let a = t.segment_softmax(z, &[0, 0, 1, 1, 2]).unwrap();
        let v = t.value(a).data();
        assert!((v[0] + v[1] - 1.0).abs() < 1e-15);
        assert!((v[2] + v[3] - 1.0).abs() < 1e-15);
        assert_eq!(v[4], 1.0);
    }

    #[test]
    fn shape_errors() {
        let mut t = Tape::new();
        let a = t.leaf(Matrix::zeros(2, 3));
        let b = t.leaf(Matrix::zeros(2, 3));
        assert!(t.matmul(a, b).is_err());
        assert!(t.gather_rows(a, &[2]).is_err());
        assert!(Matrix::from_vec(2, 2, vec![0.0; 3]).is_err());
    }

    #[test]
    fn adam_minimizes_quadratic() {
        let mut opt = Adam::new(AdamConfig::with_lr(0.1), &[2]);
        let mut p = [3.0, -2.0];
        for _ in 0..500 {
            let g = [2.0 * p[0], 2.0 * p[1]];
            opt.begin_step();
            opt.update(0, &mut p, &g);
        }
        assert!(p[0].abs() < 1e-2 && p[1].abs() < 1e-2);
    }
}
