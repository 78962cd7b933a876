//! Exact s-t flows with arc lower bounds.
//!
//! Feasibility uses the usual reduction: every lower bound becomes a demand
//! at the head and a supply at the tail, an unbounded `t -> s` return arc
//! closes the circulation, and a max flow from an auxiliary source to an
//! auxiliary sink must saturate all demands. Minimization then pushes as much
//! as possible back from `t` to `s` in the residual network.
//!
//! Capacities are arbitrary precision; `None` means unbounded. Max flows use
//! Dinic's algorithm, so the number of augmentations depends only on the
//! graph, never on capacity magnitudes.

use std::collections::VecDeque;

use num_bigint::BigUint;
use num_traits::Zero;

use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct ArcSpec {
    pub from: usize,
    pub to: usize,
    pub lower: BigUint,
    pub upper: Option<BigUint>,
}

#[derive(Clone, Debug, Default)]
pub struct FlowNetwork {
    nodes: usize,
    arcs: Vec<ArcSpec>,
}

/// A feasible flow: one value per arc in insertion order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Flow {
    pub arc_flow: Vec<BigUint>,
    pub value: BigUint,
}

/// A minimum feasible flow with the cut that proves minimality.
#[derive(Clone, Debug)]
pub struct MinFlow {
    pub flow: Flow,
    /// Nodes reachable from `t` in the final residual network. Every arc
    /// entering this set carries exactly its lower bound, and no arc leaves it.
    pub sink_side: Vec<bool>,
}

/// No flow meets the lower bounds.
#[derive(Clone, Debug)]
pub struct Infeasible {
    /// Lower-bound demand that could not be routed.
    pub shortfall: BigUint,
    /// Nodes reachable from the auxiliary source in the final residual
    /// network (auxiliary nodes excluded).
    pub source_side: Vec<bool>,
}

impl FlowNetwork {
    pub fn new(nodes: usize) -> Self {
        FlowNetwork {
            nodes,
            arcs: Vec::new(),
        }
    }

    pub fn add_node(&mut self) -> usize {
        self.nodes += 1;
        self.nodes - 1
    }

    pub fn node_count(&self) -> usize {
        self.nodes
    }

    pub fn arcs(&self) -> &[ArcSpec] {
        &self.arcs
    }

    pub fn add_arc(&mut self, from: usize, to: usize, lower: BigUint, upper: Option<BigUint>) -> usize {
        assert!(from < self.nodes && to < self.nodes, "arc endpoint out of range");
        if let Some(u) = &upper {
            assert!(*u >= lower, "upper bound below lower bound");
        }
        self.arcs.push(ArcSpec {
            from,
            to,
            lower,
            upper,
        });
        self.arcs.len() - 1
    }

    /// Any flow from `s` to `t` within all bounds, or the failed cut.
    pub fn feasible_flow(&self, s: usize, t: usize) -> Result<std::result::Result<Flow, Infeasible>> {
        let n = self.nodes;
        let (aux_s, aux_t) = (n, n + 1);
        let mut res = Residual::new(n + 2);
        let mut excess: Vec<(BigUint, BigUint)> = vec![Default::default(); n];
        let mut pairs = Vec::with_capacity(self.arcs.len());
        for a in &self.arcs {
            let cap = a.upper.as_ref().map(|u| u - &a.lower);
            pairs.push(res.add(a.from, a.to, cap, BigUint::zero()));
            excess[a.to].0 += &a.lower;
            excess[a.from].1 += &a.lower;
        }
        res.add(t, s, None, BigUint::zero());
        let mut demand = BigUint::zero();
        for (v, (inflow, outflow)) in excess.iter().enumerate() {
            if inflow > outflow {
                let d = inflow - outflow;
                demand += &d;
                res.add(aux_s, v, Some(d), BigUint::zero());
            } else if outflow > inflow {
                res.add(v, aux_t, Some(outflow - inflow), BigUint::zero());
            }
        }
        let routed = res.max_flow(aux_s, aux_t)?;
        if routed < demand {
            let reach = res.reachable(aux_s);
            return Ok(Err(Infeasible {
                shortfall: demand - routed,
                source_side: reach[..n].to_vec(),
            }));
        }
        let arc_flow: Vec<BigUint> = self
            .arcs
            .iter()
            .zip(&pairs)
            .map(|(a, &e)| &a.lower + res.reverse(e))
            .collect();
        let value = self.net_out(s, &arc_flow);
        Ok(Ok(Flow { arc_flow, value }))
    }

    /// Minimum-value feasible flow from `s` to `t`.
    pub fn min_flow(&self, s: usize, t: usize) -> Result<std::result::Result<MinFlow, Infeasible>> {
        let feasible = match self.feasible_flow(s, t)? {
            Ok(f) => f,
            Err(inf) => return Ok(Err(inf)),
        };
        let mut res = Residual::new(self.nodes);
        let mut pairs = Vec::with_capacity(self.arcs.len());
        for (a, f) in self.arcs.iter().zip(&feasible.arc_flow) {
            let forward = a.upper.as_ref().map(|u| u - f);
            pairs.push(res.add(a.from, a.to, forward, f - &a.lower));
        }
        let returned = res.max_flow(t, s)?;
        let arc_flow: Vec<BigUint> = self
            .arcs
            .iter()
            .zip(&pairs)
            .map(|(a, &e)| &a.lower + res.reverse(e))
            .collect();
        let value = self.net_out(s, &arc_flow);
        if &value + &returned != feasible.value {
            return Err(Error::Consistency(
                "flow value changed by an amount other than the returned flow".into(),
            ));
        }
        let sink_side = res.reachable(t);
        Ok(Ok(MinFlow {
            flow: Flow { arc_flow, value },
            sink_side,
        }))
    }

    fn net_out(&self, s: usize, arc_flow: &[BigUint]) -> BigUint {
        let mut out = BigUint::zero();
        let mut inn = BigUint::zero();
        for (a, f) in self.arcs.iter().zip(arc_flow) {
            if a.from == s {
                out += f;
            }
            if a.to == s {
                inn += f;
            }
        }
        if out >= inn {
            out - inn
        } else {
            BigUint::zero()
        }
    }
}

/// Residual graph with paired arcs `e` and `e ^ 1`.
struct Residual {
    adj: Vec<Vec<usize>>,
    to: Vec<usize>,
    cap: Vec<Option<BigUint>>,
}

impl Residual {
    fn new(n: usize) -> Self {
        Residual {
            adj: vec![Vec::new(); n],
            to: Vec::new(),
            cap: Vec::new(),
        }
    }

    fn add(&mut self, u: usize, v: usize, cap: Option<BigUint>, rev_cap: BigUint) -> usize {
        let e = self.to.len();
        self.adj[u].push(e);
        self.to.push(v);
        self.cap.push(cap);
        self.adj[v].push(e + 1);
        self.to.push(u);
        self.cap.push(Some(rev_cap));
        e
    }

    /// Residual capacity of the reverse of `e`, i.e. flow above the lower bound.
    fn reverse(&self, e: usize) -> &BigUint {
        self.cap[e ^ 1].as_ref().expect("reverse arcs are finite")
    }

    fn open(&self, e: usize) -> bool {
        match &self.cap[e] {
            None => true,
            Some(c) => !c.is_zero(),
        }
    }

    fn levels(&self, s: usize) -> Vec<usize> {
        let mut level = vec![usize::MAX; self.adj.len()];
        level[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &e in &self.adj[u] {
                let v = self.to[e];
                if level[v] == usize::MAX && self.open(e) {
                    level[v] = level[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        level
    }

    fn reachable(&self, s: usize) -> Vec<bool> {
        self.levels(s).into_iter().map(|l| l != usize::MAX).collect()
    }

    fn max_flow(&mut self, s: usize, t: usize) -> Result<BigUint> {
        let mut total = BigUint::zero();
        if s == t {
            return Ok(total);
        }
        loop {
            let level = self.levels(s);
            if level[t] == usize::MAX {
                return Ok(total);
            }
            let mut next = vec![0usize; self.adj.len()];
            while let Some(amount) = self.augment(s, t, &level, &mut next)? {
                total += amount;
            }
        }
    }

    /// One augmenting path in the level graph, found iteratively.
    fn augment(
        &mut self,
        s: usize,
        t: usize,
        level: &[usize],
        next: &mut [usize],
    ) -> Result<Option<BigUint>> {
        let mut path: Vec<usize> = Vec::new();
        let mut u = s;
        while u != t {
            let mut advanced = false;
            while next[u] < self.adj[u].len() {
                let e = self.adj[u][next[u]];
                let v = self.to[e];
                if self.open(e) && level[v] == level[u] + 1 {
                    path.push(e);
                    u = v;
                    advanced = true;
                    break;
                }
                next[u] += 1;
            }
            if !advanced {
                if u == s {
                    return Ok(None);
                }
                // dead end: retreat and skip the arc that led here
                let e = path.pop().expect("nonempty path when u != s");
                u = self.to[e ^ 1];
                next[u] += 1;
            }
        }
        let mut bottleneck: Option<BigUint> = None;
        for &e in &path {
            if let Some(c) = &self.cap[e] {
                if bottleneck.as_ref().is_none_or(|b| c < b) {
                    bottleneck = Some(c.clone());
                }
            }
        }
        let amount = bottleneck.ok_or_else(|| {
            Error::Consistency("augmenting path of unbounded capacity".into())
        })?;
        for &e in &path {
            if let Some(c) = self.cap[e].as_mut() {
                *c -= &amount;
            }
            if let Some(c) = self.cap[e ^ 1].as_mut() {
                *c += &amount;
            }
        }
        Ok(Some(amount))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(x: u64) -> BigUint {
        BigUint::from(x)
    }

    #[test]
    fn lower_bounds_force_flow() {
        // s -> a -> t with a lower bound of 3 on the middle arc
        let mut net = FlowNetwork::new(3);
        net.add_arc(0, 1, b(0), None);
        net.add_arc(1, 2, b(3), None);
        let f = net.feasible_flow(0, 2).unwrap().unwrap();
        assert_eq!(f.value, b(3));
        let m = net.min_flow(0, 2).unwrap().unwrap();
        assert_eq!(m.flow.value, b(3));
    }

    #[test]
    fn upper_bound_below_demand_is_infeasible() {
        let mut net = FlowNetwork::new(3);
        net.add_arc(0, 1, b(0), Some(b(2)));
        net.add_arc(1, 2, b(5), None);
        let inf = net.feasible_flow(0, 2).unwrap().unwrap_err();
        assert_eq!(inf.shortfall, b(3));
    }

    #[test]
    fn min_flow_shares_paths() {
        // diamond: s -> {a, b} -> t, plus a -> b. Lower bounds 4 on a and 6 on b
        // as node arcs; a path through a then b covers both.
        let mut net = FlowNetwork::new(6);
        let (s, a_in, a_out, b_in, b_out, t) = (0, 1, 2, 3, 4, 5);
        net.add_arc(s, a_in, b(0), None);
        net.add_arc(s, b_in, b(0), None);
        net.add_arc(a_in, a_out, b(4), None);
        net.add_arc(b_in, b_out, b(6), None);
        net.add_arc(a_out, b_in, b(0), None);
        net.add_arc(a_out, t, b(0), None);
        net.add_arc(b_out, t, b(0), None);
        let m = net.min_flow(s, t).unwrap().unwrap();
        assert_eq!(m.flow.value, b(6));
        assert!(m.sink_side[t]);
        assert!(!m.sink_side[s]);
    }

    #[test]
    fn huge_capacities_do_not_slow_down() {
        let big = BigUint::from(10u32).pow(60);
        let mut net = FlowNetwork::new(4);
        net.add_arc(0, 1, big.clone(), None);
        net.add_arc(1, 2, BigUint::zero(), None);
        net.add_arc(0, 2, b(0), None);
        net.add_arc(2, 3, b(0), None);
        let m = net.min_flow(0, 3).unwrap().unwrap();
        assert_eq!(m.flow.value, big);
    }
}
