//! Problem instances and solution cost.

use crate::error::{Error, Result};
use crate::permutation::{Permutation, ProblemKind};

/// A known optimal solution and its objective value.
#[derive(Clone, Debug, PartialEq)]
pub struct Optimum {
    pub permutation: Permutation,
    pub value: f64,
}

/// Anything the engine can evaluate.
pub trait Problem: Sync {
    fn kind(&self) -> ProblemKind;

    fn size(&self) -> usize;

    /// Cost of `p`. The caller guarantees `p.len() == self.size()`.
    fn evaluate(&self, p: &Permutation) -> f64;

    /// Cost of `child` given that `parent` costs `parent_cost`. Implementations
    /// may exploit that the two differ in few positions.
    fn evaluate_neighbor(&self, _parent: &Permutation, _parent_cost: f64, child: &Permutation) -> f64 {
        self.evaluate(child)
    }

    fn optimum(&self) -> Option<&Optimum>;
}

/// Checked cost evaluation.
pub fn cost(p: &Permutation, problem: &dyn Problem) -> Result<f64> {
    if p.len() != problem.size() {
        return Err(Error::DimensionMismatch {
            expected: problem.size(),
            found: p.len(),
        });
    }
    Ok(problem.evaluate(p))
}

fn check_square(n: usize, m: &[f64], what: &str) -> Result<()> {
    if m.len() != n * n {
        return Err(Error::Config(format!(
            "{what} matrix has {} entries, expected {}",
            m.len(),
            n * n
        )));
    }
    if let Some(x) = m.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
        return Err(Error::Config(format!(
            "{what} matrix entries must be finite and non-negative, found {x}"
        )));
    }
    Ok(())
}

/// STSP or ATSP instance given by a dense distance matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct TspInstance {
    n: usize,
    dist: Vec<f64>,
    symmetric: bool,
    optimum: Option<Optimum>,
}

impl TspInstance {
    /// `dist` is row-major `n × n`. With `symmetric` set the matrix must satisfy
    /// `d(u, v) = d(v, u)`.
    pub fn new(n: usize, dist: Vec<f64>, symmetric: bool) -> Result<Self> {
        let kind = if symmetric {
            ProblemKind::Stsp
        } else {
            ProblemKind::Atsp
        };
        kind.check_size(n)?;
        check_square(n, &dist, "distance")?;
        if symmetric {
            for u in 0..n {
                for v in u + 1..n {
                    if dist[u * n + v] != dist[v * n + u] {
                        return Err(Error::Config(format!(
                            "distance matrix not symmetric at ({u}, {v})"
                        )));
                    }
                }
            }
        }
        Ok(TspInstance {
            n,
            dist,
            symmetric,
            optimum: None,
        })
    }

    pub fn with_optimum(mut self, permutation: Permutation, value: f64) -> Result<Self> {
        if permutation.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: permutation.len(),
            });
        }
        self.optimum = Some(Optimum { permutation, value });
        Ok(self)
    }

    pub fn distance(&self, u: usize, v: usize) -> f64 {
        self.dist[u * self.n + v]
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }
}

impl Problem for TspInstance {
    fn kind(&self) -> ProblemKind {
        if self.symmetric {
            ProblemKind::Stsp
        } else {
            ProblemKind::Atsp
        }
    }

    fn size(&self) -> usize {
        self.n
    }

    fn evaluate(&self, p: &Permutation) -> f64 {
        let v = p.as_slice();
        let n = v.len();
        (0..n).map(|i| self.distance(v[i], v[(i + 1) % n])).sum()
    }

    fn optimum(&self) -> Option<&Optimum> {
        self.optimum.as_ref()
    }
}

/// Which QAPLIB matrix plays the role of the facility weights.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MatrixOrder {
    /// The first matrix in the file is `w`, the second is `f`.
    FirstIsWeight,
    /// The first matrix in the file is `f`, the second is `w`.
    FirstIsFlow,
}

/// QAP instance: `c(a) = Σ_{i,j} w(i,j) · f(a(i), a(j))`, diagonal included.
#[derive(Clone, Debug, PartialEq)]
pub struct QapInstance {
    n: usize,
    weight: Vec<f64>,
    flow: Vec<f64>,
    order: Option<MatrixOrder>,
    optimum: Option<Optimum>,
}

impl QapInstance {
    pub fn new(n: usize, weight: Vec<f64>, flow: Vec<f64>) -> Result<Self> {
        ProblemKind::Qap.check_size(n)?;
        check_square(n, &weight, "weight")?;
        check_square(n, &flow, "flow")?;
        Ok(QapInstance {
            n,
            weight,
            flow,
            order: None,
            optimum: None,
        })
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weight[i * self.n + j]
    }

    pub fn flow(&self, i: usize, j: usize) -> f64 {
        self.flow[i * self.n + j]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weight
    }

    pub fn flows(&self) -> &[f64] {
        &self.flow
    }

    /// Convention fixed by solution-file validation, if any.
    pub fn matrix_order(&self) -> Option<MatrixOrder> {
        self.order
    }

    pub(crate) fn set_order(&mut self, order: MatrixOrder) {
        self.order = Some(order);
    }

    /// Returns the instance with the weight and flow roles exchanged.
    pub fn swapped(&self) -> QapInstance {
        QapInstance {
            n: self.n,
            weight: self.flow.clone(),
            flow: self.weight.clone(),
            order: self.order.map(|o| match o {
                MatrixOrder::FirstIsWeight => MatrixOrder::FirstIsFlow,
                MatrixOrder::FirstIsFlow => MatrixOrder::FirstIsWeight,
            }),
            optimum: None,
        }
    }

    pub fn with_optimum(mut self, permutation: Permutation, value: f64) -> Result<Self> {
        if permutation.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: permutation.len(),
            });
        }
        self.optimum = Some(Optimum { permutation, value });
        Ok(self)
    }
}

impl Problem for QapInstance {
    fn kind(&self) -> ProblemKind {
        ProblemKind::Qap
    }

    fn size(&self) -> usize {
        self.n
    }

    fn evaluate(&self, p: &Permutation) -> f64 {
        let n = self.n;
        let a = p.as_slice();
        let mut total = 0.0;
        for i in 0..n {
            let w_row = &self.weight[i * n..(i + 1) * n];
            let f_row = &self.flow[a[i] * n..(a[i] + 1) * n];
            for j in 0..n {
                total += w_row[j] * f_row[a[j]];
            }
        }
        total
    }

    /// Only terms touching a changed position are re-evaluated, `O(k n)` for
    /// `k` changed positions.
    fn evaluate_neighbor(&self, parent: &Permutation, parent_cost: f64, child: &Permutation) -> f64 {
        let n = self.n;
        let (old, new) = (parent.as_slice(), child.as_slice());
        let changed: Vec<usize> = (0..n).filter(|&i| old[i] != new[i]).collect();
        if changed.len() * 4 > n {
            return self.evaluate(child);
        }
        let mut in_changed = vec![false; n];
        for &i in &changed {
            in_changed[i] = true;
        }
        let mut delta = 0.0;
        for &i in &changed {
            for j in 0..n {
                let w = self.weight[i * n + j];
                if w != 0.0 {
                    delta += w * (self.flow[new[i] * n + new[j]] - self.flow[old[i] * n + old[j]]);
                }
            }
        }
        for i in (0..n).filter(|&i| !in_changed[i]) {
            for &j in &changed {
                let w = self.weight[i * n + j];
                if w != 0.0 {
                    delta += w * (self.flow[old[i] * n + new[j]] - self.flow[old[i] * n + old[j]]);
                }
            }
        }
        parent_cost + delta
    }

    fn optimum(&self) -> Option<&Optimum> {
        self.optimum.as_ref()
    }
}
