//! Balanced transportation problems solved by successive shortest
//! augmenting paths with node potentials.
//!
//! The solver is generic over the scalar so the same code runs in `f64`
//! and in exact rational arithmetic. Costs must be nonnegative; with
//! metric costs no negative cycle can appear in the residual graph.

use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

use num::{BigRational, Zero};

pub trait FlowScalar:
    Clone + PartialOrd + Debug + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self>
{
    fn zero() -> Self;
    fn to_f64(&self) -> f64;
}

impl FlowScalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn to_f64(&self) -> f64 {
        *self
    }
}

impl FlowScalar for BigRational {
    fn zero() -> Self {
        <BigRational as Zero>::zero()
    }
    fn to_f64(&self) -> f64 {
        num::ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

/// Supplies at sources, demands at sinks and a row-major `n x m` cost
/// matrix. Total supply must equal total demand.
#[derive(Debug, Clone)]
pub struct Transport<T> {
    pub supply: Vec<T>,
    pub demand: Vec<T>,
    pub cost: Vec<T>,
}

#[derive(Debug, Clone)]
pub struct TransportPlan<T> {
    /// `(source, sink, mass)` for every edge carrying positive flow.
    pub flow: Vec<(usize, usize, T)>,
    pub total_cost: T,
    /// Dual values with `u_i - v_j <= c_ij`, tight on edges carrying flow.
    pub source_dual: Vec<T>,
    pub sink_dual: Vec<T>,
    pub augmentations: usize,
}

#[derive(Debug, Clone)]
pub struct FlowFailure {
    pub residual: f64,
    pub iterations: usize,
}

struct State<'a, T> {
    p: &'a Transport<T>,
    n: usize,
    m: usize,
    flow: Vec<T>,
    sent: Vec<T>,
    recv: Vec<T>,
    pot: Vec<T>,
    tol: T,
}

impl<'a, T: FlowScalar> State<'a, T> {
    const S: usize = 0;

    fn src(&self, i: usize) -> usize {
        1 + i
    }
    fn snk(&self, j: usize) -> usize {
        1 + self.n + j
    }
    fn sink_node(&self) -> usize {
        1 + self.n + self.m
    }

    fn supply_left(&self, i: usize) -> T {
        self.p.supply[i].clone() - self.sent[i].clone()
    }
    fn demand_left(&self, j: usize) -> T {
        self.p.demand[j].clone() - self.recv[j].clone()
    }

    fn relax(&self, dist: &mut [Option<T>], prev: &mut [usize], u: usize, du: &T, w: usize, c: T) {
        let mut reduced = c + self.pot[u].clone() - self.pot[w].clone();
        if reduced < T::zero() {
            // rounding only; potentials keep reduced costs nonnegative
            reduced = T::zero();
        }
        let nd = du.clone() + reduced;
        if dist[w].as_ref().is_none_or(|old| nd < *old) {
            dist[w] = Some(nd);
            prev[w] = u;
        }
    }

    /// Dense Dijkstra on reduced costs; stops once the super sink is settled.
    fn shortest_paths(&self) -> (Vec<Option<T>>, Vec<usize>) {
        let v = self.n + self.m + 2;
        let t = self.sink_node();
        let mut dist: Vec<Option<T>> = vec![None; v];
        let mut prev = vec![usize::MAX; v];
        let mut done = vec![false; v];
        dist[Self::S] = Some(T::zero());
        loop {
            let mut best: Option<usize> = None;
            for k in 0..v {
                if done[k] {
                    continue;
                }
                if let Some(dk) = &dist[k] {
                    if best.is_none_or(|b| *dk < *dist[b].as_ref().unwrap()) {
                        best = Some(k);
                    }
                }
            }
            let Some(u) = best else { break };
            done[u] = true;
            if u == t {
                break;
            }
            let du = dist[u].clone().unwrap();
            if u == Self::S {
                for i in 0..self.n {
                    if self.supply_left(i) > self.tol {
                        self.relax(&mut dist, &mut prev, u, &du, self.src(i), T::zero());
                    }
                }
            } else if u <= self.n {
                let i = u - 1;
                for j in 0..self.m {
                    let c = self.p.cost[i * self.m + j].clone();
                    self.relax(&mut dist, &mut prev, u, &du, self.snk(j), c);
                }
            } else {
                let j = u - 1 - self.n;
                for i in 0..self.n {
                    if self.flow[i * self.m + j] > self.tol {
                        let c = -self.p.cost[i * self.m + j].clone();
                        self.relax(&mut dist, &mut prev, u, &du, self.src(i), c);
                    }
                }
                if self.demand_left(j) > self.tol {
                    self.relax(&mut dist, &mut prev, u, &du, t, T::zero());
                }
            }
        }
        (dist, prev)
    }
}

/// Solves a balanced transportation problem.
///
/// `tol` is the mass below which residual capacities count as exhausted
/// (zero for exact scalars). Gives up after `max_augmentations`.
pub fn solve_transport<T: FlowScalar>(
    p: &Transport<T>,
    tol: T,
    max_augmentations: usize,
) -> Result<TransportPlan<T>, FlowFailure> {
    let n = p.supply.len();
    let m = p.demand.len();
    assert_eq!(p.cost.len(), n * m, "cost matrix shape");
    let mut st = State {
        p,
        n,
        m,
        flow: vec![T::zero(); n * m],
        sent: vec![T::zero(); n],
        recv: vec![T::zero(); m],
        pot: vec![T::zero(); n + m + 2],
        tol,
    };
    let t = st.sink_node();
    let mut augmentations = 0;
    let residual = |st: &State<T>| -> f64 { (0..n).map(|i| st.supply_left(i).to_f64().max(0.0)).sum() };

    while (0..n).any(|i| st.supply_left(i) > st.tol) {
        if augmentations >= max_augmentations {
            return Err(FlowFailure { residual: residual(&st), iterations: augmentations });
        }
        let (dist, prev) = st.shortest_paths();
        let Some(dt) = dist[t].clone() else {
            return Err(FlowFailure { residual: residual(&st), iterations: augmentations });
        };
        for (k, dk) in dist.iter().enumerate() {
            let step = match dk {
                Some(d) if *d < dt => d.clone(),
                _ => dt.clone(),
            };
            st.pot[k] = st.pot[k].clone() + step;
        }

        // t <- snk <- src <- snk <- ... <- src <- S
        let mut path = vec![t];
        let mut cur = t;
        while cur != State::<T>::S {
            cur = prev[cur];
            path.push(cur);
        }
        path.reverse();
        let first_src = path[1] - 1;
        let last_snk = path[path.len() - 2] - 1 - n;
        let mut delta = st.supply_left(first_src);
        let dl = st.demand_left(last_snk);
        if dl < delta {
            delta = dl;
        }
        for w in path[1..path.len() - 1].windows(2) {
            let (a, b) = (w[0], w[1]);
            if a > n {
                // backward edge sink a -> source b
                let f = st.flow[(b - 1) * m + (a - 1 - n)].clone();
                if f < delta {
                    delta = f;
                }
            }
        }
        for w in path[1..path.len() - 1].windows(2) {
            let (a, b) = (w[0], w[1]);
            if a <= n {
                let k = (a - 1) * m + (b - 1 - n);
                st.flow[k] = st.flow[k].clone() + delta.clone();
            } else {
                let k = (b - 1) * m + (a - 1 - n);
                st.flow[k] = st.flow[k].clone() - delta.clone();
            }
        }
        st.sent[first_src] = st.sent[first_src].clone() + delta.clone();
        st.recv[last_snk] = st.recv[last_snk].clone() + delta;
        augmentations += 1;
    }

    let mut flow = Vec::new();
    let mut total_cost = T::zero();
    for i in 0..n {
        for j in 0..m {
            let f = st.flow[i * m + j].clone();
            if f > T::zero() {
                total_cost = total_cost + f.clone() * p.cost[i * m + j].clone();
                flow.push((i, j, f));
            }
        }
    }
    let source_dual = (0..n).map(|i| -st.pot[st.src(i)].clone()).collect();
    let sink_dual = (0..m).map(|j| -st.pot[st.snk(j)].clone()).collect();
    Ok(TransportPlan { flow, total_cost, source_dual, sink_dual, augmentations })
}

/// Exact conversion of a finite `f64` (every one is a dyadic rational).
pub fn rational(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite float")
}
