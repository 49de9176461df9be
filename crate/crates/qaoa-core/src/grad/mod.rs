//! Reverse-mode automatic differentiation over dense real matrices.
//!
//! Define-by-run: every operation records its parents and a vector-Jacobian
//! product closure. Calling [`backward`] on a scalar loss walks the graph
//! once, deposits gradients into parameter leaves and frees the tape, so a
//! second backward through the same graph is an error. Detached tensors
//! (constants) silently receive no gradient.
//!
//! Shapes are two-dimensional throughout; vectors are n×1 or 1×n and scalars
//! are 1×1.

mod ops;

pub mod checkpoint;

use ndarray::Array2;
use std::cell::{Cell, Ref, RefCell};
use std::collections::{HashMap, HashSet};
use std::rc::Rc;
use std::sync::atomic::{AtomicU64, Ordering};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GradError {
    #[error("{op}: incompatible shapes {lhs:?} and {rhs:?}")]
    ShapeMismatch { op: &'static str, lhs: (usize, usize), rhs: (usize, usize) },
    #[error("backward needs a scalar loss, got shape {shape:?}")]
    NotScalar { shape: (usize, usize) },
    #[error("graph already consumed by a previous backward; rebuild the forward pass")]
    GraphConsumed,
}

type VjpFn = Box<dyn Fn(&Array2<f64>) -> Array2<f64>>;

static NEXT_ID: AtomicU64 = AtomicU64::new(0);

struct Inner {
    id: u64,
    data: RefCell<Array2<f64>>,
    grad: RefCell<Option<Array2<f64>>>,
    parents: RefCell<Vec<(Tensor, VjpFn)>>,
    requires_grad: bool,
    is_leaf: bool,
    consumed: Cell<bool>,
}

/// A node in the autodiff graph. Cloning is cheap (reference counted).
#[derive(Clone)]
pub struct Tensor {
    inner: Rc<Inner>,
}

impl std::fmt::Debug for Tensor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Tensor")
            .field("id", &self.inner.id)
            .field("shape", &self.shape())
            .field("leaf", &self.inner.is_leaf)
            .finish()
    }
}

impl Tensor {
    fn new_inner(data: Array2<f64>, requires_grad: bool, is_leaf: bool, parents: Vec<(Tensor, VjpFn)>) -> Self {
        Tensor {
            inner: Rc::new(Inner {
                id: NEXT_ID.fetch_add(1, Ordering::Relaxed),
                data: RefCell::new(data),
                grad: RefCell::new(None),
                parents: RefCell::new(parents),
                requires_grad,
                is_leaf,
                consumed: Cell::new(false),
            }),
        }
    }

    /// A trainable leaf; gradients accumulate here across backward passes
    /// until [`Tensor::zero_grad`].
    pub fn parameter(data: Array2<f64>) -> Self {
        Self::new_inner(data, true, true, Vec::new())
    }

    /// A detached constant; never receives a gradient.
    pub fn constant(data: Array2<f64>) -> Self {
        Self::new_inner(data, false, true, Vec::new())
    }

    pub fn scalar(v: f64) -> Self {
        Self::constant(Array2::from_elem((1, 1), v))
    }

    pub(crate) fn from_op(data: Array2<f64>, parents: Vec<(Tensor, VjpFn)>) -> Self {
        let requires = parents.iter().any(|(p, _)| p.inner.requires_grad);
        Self::new_inner(data, requires, false, parents)
    }

    pub fn shape(&self) -> (usize, usize) {
        let d = self.inner.data.borrow();
        (d.nrows(), d.ncols())
    }

    pub fn value(&self) -> Ref<'_, Array2<f64>> {
        self.inner.data.borrow()
    }

    /// Scalar payload of a 1×1 tensor.
    pub fn item(&self) -> f64 {
        let d = self.inner.data.borrow();
        assert_eq!(d.dim(), (1, 1), "item() needs a 1x1 tensor");
        d[[0, 0]]
    }

    /// Overwrite a leaf's payload (used by optimisers between passes).
    pub fn set_value(&self, data: Array2<f64>) {
        assert!(self.inner.is_leaf, "only leaves may be mutated");
        *self.inner.data.borrow_mut() = data;
    }

    pub fn grad(&self) -> Option<Array2<f64>> {
        self.inner.grad.borrow().clone()
    }

    pub fn zero_grad(&self) {
        *self.inner.grad.borrow_mut() = None;
    }

    pub fn requires_grad(&self) -> bool {
        self.inner.requires_grad
    }
}

/// Run reverse-mode accumulation from a scalar loss.
///
/// Every reachable parameter leaf receives (accumulates) its gradient; the
/// traversed graph is freed afterwards.
pub fn backward(loss: &Tensor) -> Result<(), GradError> {
    let shape = loss.shape();
    if shape != (1, 1) {
        return Err(GradError::NotScalar { shape });
    }
    if loss.inner.consumed.get() {
        return Err(GradError::GraphConsumed);
    }

    // iterative post-order topological sort over parents
    let mut topo: Vec<Tensor> = Vec::new();
    let mut visited: HashSet<u64> = HashSet::new();
    let mut stack: Vec<(Tensor, bool)> = vec![(loss.clone(), false)];
    while let Some((node, children_done)) = stack.pop() {
        if children_done {
            topo.push(node);
            continue;
        }
        if !visited.insert(node.inner.id) {
            continue;
        }
        stack.push((node.clone(), true));
        for (parent, _) in node.inner.parents.borrow().iter() {
            if !visited.contains(&parent.inner.id) {
                stack.push((parent.clone(), false));
            }
        }
    }

    let mut grads: HashMap<u64, Array2<f64>> = HashMap::new();
    grads.insert(loss.inner.id, Array2::ones((1, 1)));

    for node in topo.iter().rev() {
        let Some(g) = grads.remove(&node.inner.id) else { continue };
        if node.inner.is_leaf {
            if node.inner.requires_grad {
                let mut slot = node.inner.grad.borrow_mut();
                match slot.as_mut() {
                    Some(acc) => *acc += &g,
                    None => *slot = Some(g),
                }
            }
            continue;
        }
        let parents = node.inner.parents.take();
        node.inner.consumed.set(true);
        for (parent, vjp) in &parents {
            if !parent.inner.requires_grad {
                continue;
            }
            let pg = vjp(&g);
            debug_assert_eq!(
                (pg.nrows(), pg.ncols()),
                parent.shape(),
                "vjp produced a gradient of the wrong shape"
            );
            match grads.entry(parent.inner.id) {
                std::collections::hash_map::Entry::Occupied(mut e) => *e.get_mut() += &pg,
                std::collections::hash_map::Entry::Vacant(e) => {
                    e.insert(pg);
                }
            }
        }
    }
    Ok(())
}

/// Adam over a fixed list of parameter tensors.
#[derive(Debug)]
pub struct Adam {
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    t: u64,
    m: Vec<Array2<f64>>,
    v: Vec<Array2<f64>>,
}

impl Adam {
    pub fn new(lr: f64, params: &[Tensor]) -> Self {
        let m = params.iter().map(|p| Array2::zeros(p.shape())).collect();
        let v = params.iter().map(|p| Array2::zeros(p.shape())).collect();
        Self { lr, beta1: 0.9, beta2: 0.999, eps: 1e-8, t: 0, m, v }
    }

    /// Apply one update from the accumulated gradients and clear them.
    /// Parameters with no gradient this round are left untouched.
    pub fn step(&mut self, params: &[Tensor]) {
        self.t += 1;
        let bc1 = 1.0 - self.beta1.powi(self.t as i32);
        let bc2 = 1.0 - self.beta2.powi(self.t as i32);
        for (k, p) in params.iter().enumerate() {
            let Some(g) = p.grad() else { continue };
            self.m[k] = &self.m[k] * self.beta1 + &g * (1.0 - self.beta1);
            self.v[k] = &self.v[k] * self.beta2 + &g.mapv(|x| x * x) * (1.0 - self.beta2);
            let mhat = &self.m[k] / bc1;
            let vhat = &self.v[k] / bc2;
            let mut data = p.inner.data.borrow_mut();
            ndarray::Zip::from(&mut *data).and(&mhat).and(&vhat).for_each(|w, &m, &v| {
                *w -= self.lr * m / (v.sqrt() + self.eps);
            });
            p.zero_grad();
        }
    }

    pub fn lr(&self) -> f64 {
        self.lr
    }

    pub fn set_lr(&mut self, lr: f64) {
        self.lr = lr;
    }
}

/// Global L2-norm clipping over parameter gradients; returns the pre-clip
/// norm and whether clipping fired.
pub fn clip_grad_norm(params: &[Tensor], max_norm: f64) -> (f64, bool) {
    let mut total = 0.0;
    for p in params {
        if let Some(g) = p.grad() {
            total += g.iter().map(|v| v * v).sum::<f64>();
        }
    }
    let norm = total.sqrt();
    if norm <= max_norm || norm == 0.0 {
        return (norm, false);
    }
    let scale = max_norm / norm;
    for p in params {
        let mut slot = p.inner.grad.borrow_mut();
        if let Some(acc) = slot.as_mut() {
            acc.mapv_inplace(|v| v * scale);
        }
    }
    (norm, true)
}
