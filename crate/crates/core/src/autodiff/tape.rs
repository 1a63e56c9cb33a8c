//! Scalar computation tape with a differentiable backward pass.
//!
//! Every arithmetic method appends one node and evaluates it eagerly, so a
//! node's value is always available. Two backward passes are provided:
//!
//! * [`Tape::backward_values`] — plain numeric adjoint accumulation; used
//!   for first derivatives.
//! * [`Tape::backward_graph`] — the adjoint arithmetic is itself recorded
//!   as tape nodes, so the returned gradient nodes are differentiable
//!   functions of the leaves. Differentiating the inner product of those
//!   gradient nodes with a constant vector `v` yields an exact `H·v`.
//!
//! Node ids are topologically ordered by construction (an op only refers
//! to earlier ids), which is what lets both passes run as a single reverse
//! sweep.

pub type VarId = u32;

#[derive(Clone, Copy, Debug)]
enum Op {
    Leaf,
    Const,
    Add(VarId, VarId),
    Sub(VarId, VarId),
    Mul(VarId, VarId),
    Div(VarId, VarId),
    Neg(VarId),
    Exp(VarId),
    Ln(VarId),
    Tanh(VarId),
    Relu(VarId),
    /// Heaviside step of the input (1 if x > 0, else 0). Derivative is zero
    /// everywhere, which is what makes relu twice-differentiable a.e. The
    /// operand is kept for debugging even though no rule reads it.
    Step(#[allow(dead_code)] VarId),
}

#[derive(Default)]
pub struct Tape {
    values: Vec<f64>,
    ops: Vec<Op>,
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    /// Number of nodes currently on the tape.
    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn value(&self, id: VarId) -> f64 {
        self.values[id as usize]
    }

    fn push(&mut self, value: f64, op: Op) -> VarId {
        debug_assert!(self.ops.len() < u32::MAX as usize);
        let id = self.ops.len() as VarId;
        self.values.push(value);
        self.ops.push(op);
        id
    }

    /// Differentiable input (a parameter).
    pub fn leaf(&mut self, value: f64) -> VarId {
        self.push(value, Op::Leaf)
    }

    /// Constant; receives no adjoint and contributes no derivative.
    pub fn constant(&mut self, value: f64) -> VarId {
        self.push(value, Op::Const)
    }

    pub fn add(&mut self, a: VarId, b: VarId) -> VarId {
        let v = self.value(a) + self.value(b);
        self.push(v, Op::Add(a, b))
    }

    pub fn sub(&mut self, a: VarId, b: VarId) -> VarId {
        let v = self.value(a) - self.value(b);
        self.push(v, Op::Sub(a, b))
    }

    pub fn mul(&mut self, a: VarId, b: VarId) -> VarId {
        let v = self.value(a) * self.value(b);
        self.push(v, Op::Mul(a, b))
    }

    pub fn div(&mut self, a: VarId, b: VarId) -> VarId {
        let v = self.value(a) / self.value(b);
        self.push(v, Op::Div(a, b))
    }

    pub fn neg(&mut self, a: VarId) -> VarId {
        let v = -self.value(a);
        self.push(v, Op::Neg(a))
    }

    pub fn exp(&mut self, a: VarId) -> VarId {
        let v = self.value(a).exp();
        self.push(v, Op::Exp(a))
    }

    pub fn ln(&mut self, a: VarId) -> VarId {
        let v = self.value(a).ln();
        self.push(v, Op::Ln(a))
    }

    pub fn tanh(&mut self, a: VarId) -> VarId {
        let v = self.value(a).tanh();
        self.push(v, Op::Tanh(a))
    }

    pub fn relu(&mut self, a: VarId) -> VarId {
        let v = self.value(a).max(0.0);
        self.push(v, Op::Relu(a))
    }

    fn step(&mut self, a: VarId) -> VarId {
        let v = if self.value(a) > 0.0 { 1.0 } else { 0.0 };
        self.push(v, Op::Step(a))
    }

    /// a*b + c in two nodes.
    pub fn mul_add(&mut self, a: VarId, b: VarId, c: VarId) -> VarId {
        let p = self.mul(a, b);
        self.add(p, c)
    }

    /// Numeric adjoints of `output` with respect to `wrt`.
    pub fn backward_values(&self, output: VarId, wrt: &[VarId]) -> Vec<f64> {
        let n = output as usize + 1;
        let mut adj = vec![0.0f64; n];
        adj[output as usize] = 1.0;
        for i in (0..n).rev() {
            let a = adj[i];
            if a == 0.0 {
                continue;
            }
            match self.ops[i] {
                Op::Leaf | Op::Const | Op::Step(_) => {}
                Op::Add(x, y) => {
                    adj[x as usize] += a;
                    adj[y as usize] += a;
                }
                Op::Sub(x, y) => {
                    adj[x as usize] += a;
                    adj[y as usize] -= a;
                }
                Op::Mul(x, y) => {
                    adj[x as usize] += a * self.values[y as usize];
                    adj[y as usize] += a * self.values[x as usize];
                }
                Op::Div(x, y) => {
                    let yv = self.values[y as usize];
                    adj[x as usize] += a / yv;
                    adj[y as usize] -= a * self.values[i] / yv;
                }
                Op::Neg(x) => adj[x as usize] -= a,
                Op::Exp(x) => adj[x as usize] += a * self.values[i],
                Op::Ln(x) => adj[x as usize] += a / self.values[x as usize],
                Op::Tanh(x) => {
                    let t = self.values[i];
                    adj[x as usize] += a * (1.0 - t * t);
                }
                Op::Relu(x) => {
                    if self.values[x as usize] > 0.0 {
                        adj[x as usize] += a;
                    }
                }
            }
        }
        wrt.iter()
            .map(|&id| {
                let i = id as usize;
                if i < n {
                    adj[i]
                } else {
                    0.0
                }
            })
            .collect()
    }

    /// Adjoints of `output` recorded as new tape nodes, one per `wrt` entry.
    ///
    /// Leaves that `output` does not depend on get a fresh zero constant.
    /// The appended subgraph is a differentiable function of the original
    /// leaves, so a second (numeric) backward pass through it yields second
    /// derivatives.
    pub fn backward_graph(&mut self, output: VarId, wrt: &[VarId]) -> Vec<VarId> {
        let n = output as usize + 1;
        let mut adj: Vec<Option<VarId>> = vec![None; n];
        adj[output as usize] = Some(self.constant(1.0));

        fn acc(tape: &mut Tape, adj: &mut [Option<VarId>], idx: VarId, g: VarId) {
            let slot = idx as usize;
            adj[slot] = Some(match adj[slot] {
                None => g,
                Some(prev) => tape.add(prev, g),
            });
        }

        for i in (0..n).rev() {
            let Some(a) = adj[i] else { continue };
            let node = i as VarId;
            match self.ops[i] {
                Op::Leaf | Op::Const | Op::Step(_) => {}
                Op::Add(x, y) => {
                    acc(self, &mut adj, x, a);
                    acc(self, &mut adj, y, a);
                }
                Op::Sub(x, y) => {
                    acc(self, &mut adj, x, a);
                    let na = self.neg(a);
                    acc(self, &mut adj, y, na);
                }
                Op::Mul(x, y) => {
                    let gx = self.mul(a, y);
                    acc(self, &mut adj, x, gx);
                    let gy = self.mul(a, x);
                    acc(self, &mut adj, y, gy);
                }
                Op::Div(x, y) => {
                    // d(x/y)/dx = 1/y ; d(x/y)/dy = -(x/y)/y
                    let gx = self.div(a, y);
                    acc(self, &mut adj, x, gx);
                    let aq = self.mul(a, node);
                    let gy = self.div(aq, y);
                    let gy = self.neg(gy);
                    acc(self, &mut adj, y, gy);
                }
                Op::Neg(x) => {
                    let g = self.neg(a);
                    acc(self, &mut adj, x, g);
                }
                Op::Exp(x) => {
                    let g = self.mul(a, node);
                    acc(self, &mut adj, x, g);
                }
                Op::Ln(x) => {
                    let g = self.div(a, x);
                    acc(self, &mut adj, x, g);
                }
                Op::Tanh(x) => {
                    // dtanh = 1 - tanh^2
                    let t2 = self.mul(node, node);
                    let one = self.constant(1.0);
                    let d = self.sub(one, t2);
                    let g = self.mul(a, d);
                    acc(self, &mut adj, x, g);
                }
                Op::Relu(x) => {
                    let s = self.step(x);
                    let g = self.mul(a, s);
                    acc(self, &mut adj, x, g);
                }
            }
        }

        wrt.iter()
            .map(|&id| match adj.get(id as usize).copied().flatten() {
                Some(g) => g,
                None => self.constant(0.0),
            })
            .collect()
    }
}
