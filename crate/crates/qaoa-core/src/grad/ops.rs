//! The operation set: forward semantics plus exact vector-Jacobian products.

use ndarray::{concatenate, s, Array2, Axis};

use super::{GradError, Tensor, VjpFn};

fn check(op: &'static str, ok: bool, lhs: (usize, usize), rhs: (usize, usize)) -> Result<(), GradError> {
    if ok {
        Ok(())
    } else {
        Err(GradError::ShapeMismatch { op, lhs, rhs })
    }
}

impl Tensor {
    pub fn matmul(&self, rhs: &Tensor) -> Result<Tensor, GradError> {
        let (m, k) = self.shape();
        let (k2, n) = rhs.shape();
        check("matmul", k == k2, (m, k), (k2, n))?;
        let data = self.value().dot(&*rhs.value());
        let a = self.clone();
        let b = rhs.clone();
        let b_for_a = b.clone();
        let a_for_b = a.clone();
        let parents: Vec<(Tensor, VjpFn)> = vec![
            (a, Box::new(move |g| g.dot(&b_for_a.value().t()))),
            (b, Box::new(move |g| a_for_b.value().t().dot(g))),
        ];
        Ok(Tensor::from_op(data, parents))
    }

    pub fn add(&self, rhs: &Tensor) -> Result<Tensor, GradError> {
        check("add", self.shape() == rhs.shape(), self.shape(), rhs.shape())?;
        let data = &*self.value() + &*rhs.value();
        Ok(Tensor::from_op(
            data,
            vec![
                (self.clone(), Box::new(|g| g.clone())),
                (rhs.clone(), Box::new(|g| g.clone())),
            ],
        ))
    }

    pub fn sub(&self, rhs: &Tensor) -> Result<Tensor, GradError> {
        check("sub", self.shape() == rhs.shape(), self.shape(), rhs.shape())?;
        let data = &*self.value() - &*rhs.value();
        Ok(Tensor::from_op(
            data,
            vec![
                (self.clone(), Box::new(|g| g.clone())),
                (rhs.clone(), Box::new(|g| -g)),
            ],
        ))
    }

    /// Add a 1×n bias row to every row of an m×n tensor.
    pub fn add_bias(&self, bias: &Tensor) -> Result<Tensor, GradError> {
        let (_, n) = self.shape();
        check("add_bias", bias.shape() == (1, n), self.shape(), bias.shape())?;
        let data = &*self.value() + &*bias.value();
        Ok(Tensor::from_op(
            data,
            vec![
                (self.clone(), Box::new(|g| g.clone())),
                (bias.clone(), Box::new(|g| g.sum_axis(Axis(0)).insert_axis(Axis(0)))),
            ],
        ))
    }

    /// Broadcast-add a 1×1 scalar tensor.
    pub fn add_scalar_t(&self, scalar: &Tensor) -> Result<Tensor, GradError> {
        check("add_scalar_t", scalar.shape() == (1, 1), self.shape(), scalar.shape())?;
        let data = &*self.value() + scalar.item();
        Ok(Tensor::from_op(
            data,
            vec![
                (self.clone(), Box::new(|g| g.clone())),
                (scalar.clone(), Box::new(|g| Array2::from_elem((1, 1), g.sum()))),
            ],
        ))
    }

    /// Multiply every row elementwise by a 1×n row vector.
    pub fn mul_row_vec(&self, row: &Tensor) -> Result<Tensor, GradError> {
        let (_, n) = self.shape();
        check("mul_row_vec", row.shape() == (1, n), self.shape(), row.shape())?;
        let data = &*self.value() * &*row.value();
        let a = self.clone();
        let r = row.clone();
        let r_for_a = r.clone();
        let a_for_r = a.clone();
        Ok(Tensor::from_op(
            data,
            vec![
                (a, Box::new(move |g| g * &*r_for_a.value())),
                (
                    r,
                    Box::new(move |g| (g * &*a_for_r.value()).sum_axis(Axis(0)).insert_axis(Axis(0))),
                ),
            ],
        ))
    }

    pub fn scale(&self, c: f64) -> Tensor {
        let data = self.value().mapv(|v| v * c);
        Tensor::from_op(data, vec![(self.clone(), Box::new(move |g| g.mapv(|v| v * c)))])
    }

    /// Elementwise affine map `a*x + b`.
    pub fn affine(&self, a: f64, b: f64) -> Tensor {
        let data = self.value().mapv(|v| a * v + b);
        Tensor::from_op(data, vec![(self.clone(), Box::new(move |g| g.mapv(|v| v * a)))])
    }

    pub fn neg(&self) -> Tensor {
        self.scale(-1.0)
    }

    pub fn relu(&self) -> Tensor {
        let data = self.value().mapv(|v| v.max(0.0));
        let x = self.clone();
        Tensor::from_op(
            data,
            vec![(
                x.clone(),
                Box::new(move |g| {
                    let xv = x.value();
                    let mut out = g.clone();
                    ndarray::Zip::from(&mut out).and(&*xv).for_each(|o, &v| {
                        if v <= 0.0 {
                            *o = 0.0;
                        }
                    });
                    out
                }),
            )],
        )
    }

    pub fn sigmoid(&self) -> Tensor {
        let data = self.value().mapv(|v| 1.0 / (1.0 + (-v).exp()));
        let out = data.clone();
        Tensor::from_op(
            data,
            vec![(self.clone(), Box::new(move |g| g * &out.mapv(|s| s * (1.0 - s))))],
        )
    }

    pub fn tanh(&self) -> Tensor {
        let data = self.value().mapv(f64::tanh);
        let out = data.clone();
        Tensor::from_op(
            data,
            vec![(self.clone(), Box::new(move |g| g * &out.mapv(|t| 1.0 - t * t)))],
        )
    }

    pub fn exp(&self) -> Tensor {
        let data = self.value().mapv(f64::exp);
        let out = data.clone();
        Tensor::from_op(data, vec![(self.clone(), Box::new(move |g| g * &out))])
    }

    /// Row-wise softmax.
    pub fn softmax_rows(&self) -> Tensor {
        let x = self.value();
        let mut data = Array2::zeros(x.raw_dim());
        for (mut orow, xrow) in data.rows_mut().into_iter().zip(x.rows()) {
            let max = xrow.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let mut denom = 0.0;
            for (o, &v) in orow.iter_mut().zip(xrow) {
                *o = (v - max).exp();
                denom += *o;
            }
            orow.mapv_inplace(|v| v / denom);
        }
        drop(x);
        let probs = data.clone();
        Tensor::from_op(
            data,
            vec![(
                self.clone(),
                Box::new(move |g| {
                    let mut out = Array2::zeros(g.raw_dim());
                    for ((mut orow, grow), prow) in out.rows_mut().into_iter().zip(g.rows()).zip(probs.rows()) {
                        let dot: f64 = grow.iter().zip(prow.iter()).map(|(a, b)| a * b).sum();
                        for ((o, &gv), &pv) in orow.iter_mut().zip(grow).zip(prow) {
                            *o = pv * (gv - dot);
                        }
                    }
                    out
                }),
            )],
        )
    }

    pub fn elementwise_mul(&self, rhs: &Tensor) -> Result<Tensor, GradError> {
        check("elementwise_mul", self.shape() == rhs.shape(), self.shape(), rhs.shape())?;
        let data = &*self.value() * &*rhs.value();
        let a = self.clone();
        let b = rhs.clone();
        let b_for_a = b.clone();
        let a_for_b = a.clone();
        Ok(Tensor::from_op(
            data,
            vec![
                (a, Box::new(move |g| g * &*b_for_a.value())),
                (b, Box::new(move |g| g * &*a_for_b.value())),
            ],
        ))
    }

    pub fn concat_cols(&self, rhs: &Tensor) -> Result<Tensor, GradError> {
        let (m, a) = self.shape();
        let (m2, _b) = rhs.shape();
        check("concat_cols", m == m2, self.shape(), rhs.shape())?;
        let data = concatenate![Axis(1), self.value().view(), rhs.value().view()];
        Ok(Tensor::from_op(
            data,
            vec![
                (self.clone(), Box::new(move |g| g.slice(s![.., ..a]).to_owned())),
                (rhs.clone(), Box::new(move |g| g.slice(s![.., a..]).to_owned())),
            ],
        ))
    }

    pub fn concat_rows(&self, rhs: &Tensor) -> Result<Tensor, GradError> {
        let (m, c) = self.shape();
        let (_m2, c2) = rhs.shape();
        check("concat_rows", c == c2, self.shape(), rhs.shape())?;
        let data = concatenate![Axis(0), self.value().view(), rhs.value().view()];
        Ok(Tensor::from_op(
            data,
            vec![
                (self.clone(), Box::new(move |g| g.slice(s![..m, ..]).to_owned())),
                (rhs.clone(), Box::new(move |g| g.slice(s![m.., ..]).to_owned())),
            ],
        ))
    }

    pub fn mean_all(&self) -> Tensor {
        let (m, n) = self.shape();
        let count = (m * n) as f64;
        let data = Array2::from_elem((1, 1), self.value().sum() / count);
        Tensor::from_op(
            data,
            vec![(self.clone(), Box::new(move |g| Array2::from_elem((m, n), g[[0, 0]] / count)))],
        )
    }

    pub fn sum_all(&self) -> Tensor {
        let (m, n) = self.shape();
        let data = Array2::from_elem((1, 1), self.value().sum());
        Tensor::from_op(
            data,
            vec![(self.clone(), Box::new(move |g| Array2::from_elem((m, n), g[[0, 0]])))],
        )
    }

    /// Row sums: m×n → m×1.
    pub fn sum_cols(&self) -> Tensor {
        let (_, n) = self.shape();
        let data = self.value().sum_axis(Axis(1)).insert_axis(Axis(1));
        Tensor::from_op(
            data,
            vec![(
                self.clone(),
                Box::new(move |g| {
                    let col = g.column(0);
                    let mut out = Array2::zeros((col.len(), n));
                    for (mut row, &gv) in out.rows_mut().into_iter().zip(col) {
                        row.fill(gv);
                    }
                    out
                }),
            )],
        )
    }

    /// Extract column j as an m×1 tensor.
    pub fn col(&self, j: usize) -> Tensor {
        let (m, n) = self.shape();
        assert!(j < n, "column index out of range");
        let data = self.value().column(j).to_owned().insert_axis(Axis(1));
        Tensor::from_op(
            data,
            vec![(
                self.clone(),
                Box::new(move |g| {
                    let mut out = Array2::zeros((m, n));
                    for (i, &gv) in g.column(0).iter().enumerate() {
                        out[[i, j]] = gv;
                    }
                    out
                }),
            )],
        )
    }

    pub fn transpose(&self) -> Tensor {
        let data = self.value().t().to_owned();
        Tensor::from_op(data, vec![(self.clone(), Box::new(|g| g.t().to_owned()))])
    }

    /// Quadratic form `q^T M q` for a constant matrix M and an n×1 input.
    pub fn quad_form(&self, m: &Array2<f64>) -> Result<Tensor, GradError> {
        let (n, one) = self.shape();
        check("quad_form", one == 1 && m.nrows() == n && m.ncols() == n, (n, one), (m.nrows(), m.ncols()))?;
        let q = self.value();
        let mq = m.dot(&q.column(0));
        let val = q.column(0).dot(&mq);
        let msym = m + &m.t();
        let x = self.clone();
        Ok(Tensor::from_op(
            Array2::from_elem((1, 1), val),
            vec![(
                x.clone(),
                Box::new(move |g| {
                    let q = x.value();
                    let grad = msym.dot(&q.column(0)).insert_axis(Axis(1));
                    grad * g[[0, 0]]
                }),
            )],
        ))
    }

    pub fn clamp(&self, lo: f64, hi: f64) -> Tensor {
        let data = self.value().mapv(|v| v.clamp(lo, hi));
        let x = self.clone();
        Tensor::from_op(
            data,
            vec![(
                x.clone(),
                Box::new(move |g| {
                    let xv = x.value();
                    let mut out = g.clone();
                    ndarray::Zip::from(&mut out).and(&*xv).for_each(|o, &v| {
                        if v < lo || v > hi {
                            *o = 0.0;
                        }
                    });
                    out
                }),
            )],
        )
    }

    /// Elementwise minimum; ties route the gradient to `self`.
    pub fn min_elem(&self, rhs: &Tensor) -> Result<Tensor, GradError> {
        check("min_elem", self.shape() == rhs.shape(), self.shape(), rhs.shape())?;
        let a = self.clone();
        let b = rhs.clone();
        let data = ndarray::Zip::from(&*a.value()).and(&*b.value()).map_collect(|&x, &y| x.min(y));
        let a2 = a.clone();
        let b2 = b.clone();
        let a3 = a.clone();
        let b3 = b.clone();
        Ok(Tensor::from_op(
            data,
            vec![
                (
                    a,
                    Box::new(move |g| {
                        let mut out = g.clone();
                        ndarray::Zip::from(&mut out).and(&*a2.value()).and(&*b2.value()).for_each(|o, &x, &y| {
                            if x > y {
                                *o = 0.0;
                            }
                        });
                        out
                    }),
                ),
                (
                    b,
                    Box::new(move |g| {
                        let mut out = g.clone();
                        ndarray::Zip::from(&mut out).and(&*a3.value()).and(&*b3.value()).for_each(|o, &x, &y| {
                            if x <= y {
                                *o = 0.0;
                            }
                        });
                        out
                    }),
                ),
            ],
        ))
    }

    /// External scalar-valued function of one tensor with a caller-supplied
    /// Jacobian-transpose. Lets non-tape computations (e.g. quantum circuit
    /// expectations with analytic gradients) join the graph.
    pub fn custom_unary(
        input: &Tensor,
        value: Array2<f64>,
        vjp: impl Fn(&Array2<f64>) -> Array2<f64> + 'static,
    ) -> Tensor {
        Tensor::from_op(value, vec![(input.clone(), Box::new(vjp))])
    }
}
