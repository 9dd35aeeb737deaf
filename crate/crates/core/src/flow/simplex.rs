//! Primal network simplex with a block-search pivot rule.
//!
//! The spanning-tree bookkeeping (parent, thread, reverse thread, subtree
//! sizes and last successors) follows the LEMON library's implementation.
//! Flows are `i64`; costs and potentials use the generic [`Cost`] type so
//! the caller can pick a width that rules out overflow.

use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

pub(crate) trait Cost:
    Copy
    + Ord
    + Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    const ZERO: Self;
    fn from_i64(v: i64) -> Self;
}

impl Cost for i64 {
    const ZERO: Self = 0;
    fn from_i64(v: i64) -> Self {
        v
    }
}

impl Cost for i128 {
    const ZERO: Self = 0;
    fn from_i64(v: i64) -> Self {
        v as i128
    }
}

const INF: i64 = i64::MAX;
const STATE_UPPER: i8 = -1;
const STATE_TREE: i8 = 0;
const STATE_LOWER: i8 = 1;
const DIR_UP: i8 = 1;
const DIR_DOWN: i8 = -1;
const NONE: usize = usize::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Outcome {
    Optimal,
    Infeasible,
}

#[derive(Clone)]
pub(crate) struct NetworkSimplex<C: Cost> {
    node_num: usize,
    arc_num: usize,
    source: Vec<usize>,
    target: Vec<usize>,
    cap: Vec<i64>,
    cost: Vec<C>,
    flow: Vec<i64>,
    state: Vec<i8>,
    pi: Vec<C>,
    parent: Vec<usize>,
    pred: Vec<usize>,
    thread: Vec<usize>,
    rev_thread: Vec<usize>,
    succ_num: Vec<usize>,
    last_succ: Vec<usize>,
    pred_dir: Vec<i8>,
    dirty_revs: Vec<usize>,
    root: usize,
    in_arc: usize,
    join: usize,
    u_in: usize,
    v_in: usize,
    u_out: usize,
    delta: i64,
    block_size: usize,
    next_arc: usize,
}

impl<C: Cost> NetworkSimplex<C> {
    /// Builds the initial artificial basis. `art_cost` must exceed the cost
    /// of every simple path in the graph.
    pub(crate) fn new(
        node_num: usize,
        tails: &[usize],
        heads: &[usize],
        caps: &[i64],
        costs: &[C],
        supply: &[i64],
        art_cost: C,
    ) -> Self {
        let arc_num = tails.len();
        let all = arc_num + node_num;
        let root = node_num;
        let mut s = Self {
            node_num,
            arc_num,
            source: Vec::with_capacity(all),
            target: Vec::with_capacity(all),
            cap: Vec::with_capacity(all),
            cost: Vec::with_capacity(all),
            flow: vec![0; all],
            state: Vec::with_capacity(all),
            pi: vec![C::ZERO; node_num + 1],
            parent: vec![NONE; node_num + 1],
            pred: vec![NONE; node_num + 1],
            thread: vec![0; node_num + 1],
            rev_thread: vec![0; node_num + 1],
            succ_num: vec![0; node_num + 1],
            last_succ: vec![0; node_num + 1],
            pred_dir: vec![0; node_num + 1],
            dirty_revs: Vec::new(),
            root,
            in_arc: 0,
            join: 0,
            u_in: 0,
            v_in: 0,
            u_out: 0,
            delta: 0,
            block_size: ((arc_num as f64).sqrt().ceil() as usize).max(10),
            next_arc: 0,
        };
        s.source.extend_from_slice(tails);
        s.target.extend_from_slice(heads);
        s.cap.extend_from_slice(caps);
        s.cost.extend_from_slice(costs);
        s.state.resize(arc_num, STATE_LOWER);

        s.thread[root] = 0;
        s.rev_thread[0] = root;
        s.succ_num[root] = node_num + 1;
        s.last_succ[root] = root.wrapping_sub(1);
        for u in 0..node_num {
            let e = arc_num + u;
            s.parent[u] = root;
            s.pred[u] = e;
            s.thread[u] = u + 1;
            s.rev_thread[u + 1] = u;
            s.succ_num[u] = 1;
            s.last_succ[u] = u;
            s.cap.push(INF);
            s.state.push(STATE_TREE);
            if supply[u] >= 0 {
                s.pred_dir[u] = DIR_UP;
                s.pi[u] = C::ZERO;
                s.source.push(u);
                s.target.push(root);
                s.flow[e] = supply[u];
                s.cost.push(C::ZERO);
            } else {
                s.pred_dir[u] = DIR_DOWN;
                s.pi[u] = art_cost;
                s.source.push(root);
                s.target.push(u);
                s.flow[e] = -supply[u];
                s.cost.push(art_cost);
            }
        }
        if node_num == 0 {
            s.thread[root] = root;
            s.rev_thread[root] = root;
            s.last_succ[root] = root;
        }
        s
    }

    pub(crate) fn run(&mut self) -> Outcome {
        while self.find_entering_arc() {
            self.find_join_node();
            let change = self.find_leaving_arc();
            self.change_flow(change);
            if change {
                self.update_tree_structure();
                self.update_potential();
            }
        }
        if (self.arc_num..self.arc_num + self.node_num).any(|e| self.flow[e] != 0) {
            Outcome::Infeasible
        } else {
            Outcome::Optimal
        }
    }

    /// Replaces the arc costs while keeping the current basis, which stays
    /// primal feasible. Potentials are recomputed along the thread.
    pub(crate) fn reprice(&mut self, costs: &[C], art_cost: C) {
        self.cost[..self.arc_num].copy_from_slice(costs);
        for u in 0..self.node_num {
            let e = self.arc_num + u;
            self.cost[e] = if self.source[e] == self.root {
                art_cost
            } else {
                C::ZERO
            };
        }
        self.pi[self.root] = C::ZERO;
        let mut u = self.thread[self.root];
        while u != self.root {
            let dir = C::from_i64(self.pred_dir[u] as i64);
            self.pi[u] = self.pi[self.parent[u]] - dir * self.cost[self.pred[u]];
            u = self.thread[u];
        }
        self.next_arc = 0;
    }

    pub(crate) fn flows(&self) -> &[i64] {
        &self.flow[..self.arc_num]
    }

    #[inline]
    fn reduced(&self, e: usize) -> C {
        self.cost[e] + self.pi[self.source[e]] - self.pi[self.target[e]]
    }

    fn find_entering_arc(&mut self) -> bool {
        let m = self.arc_num;
        if m == 0 {
            return false;
        }
        let mut min = C::ZERO;
        let mut cnt = self.block_size;
        let mut e = self.next_arc;
        let mut scanned = 0;
        while scanned < m {
            let s = self.state[e];
            if s != STATE_TREE {
                let c = if s == STATE_LOWER {
                    self.reduced(e)
                } else {
                    -self.reduced(e)
                };
                if c < min {
                    min = c;
                    self.in_arc = e;
                }
            }
            e += 1;
            if e == m {
                e = 0;
            }
            scanned += 1;
            cnt -= 1;
            if cnt == 0 {
                if min < C::ZERO {
                    self.next_arc = e;
                    return true;
                }
                cnt = self.block_size;
            }
        }
        if min < C::ZERO {
            self.next_arc = e;
            return true;
        }
        false
    }

    fn find_join_node(&mut self) {
        let mut u = self.source[self.in_arc];
        let mut v = self.target[self.in_arc];
        while u != v {
            if self.succ_num[u] < self.succ_num[v] {
                u = self.parent[u];
            } else {
                v = self.parent[v];
            }
        }
        self.join = u;
    }

    fn find_leaving_arc(&mut self) -> bool {
        let (first, second) = if self.state[self.in_arc] == STATE_LOWER {
            (self.source[self.in_arc], self.target[self.in_arc])
        } else {
            (self.target[self.in_arc], self.source[self.in_arc])
        };
        self.delta = self.cap[self.in_arc];
        let mut result = 0;

        let mut u = first;
        while u != self.join {
            let e = self.pred[u];
            let d = if self.pred_dir[u] == DIR_DOWN {
                if self.cap[e] == INF {
                    INF
                } else {
                    self.cap[e] - self.flow[e]
                }
            } else {
                self.flow[e]
            };
            if d < self.delta {
                self.delta = d;
                self.u_out = u;
                result = 1;
            }
            u = self.parent[u];
        }
        let mut u = second;
        while u != self.join {
            let e = self.pred[u];
            let d = if self.pred_dir[u] == DIR_UP {
                if self.cap[e] == INF {
                    INF
                } else {
                    self.cap[e] - self.flow[e]
                }
            } else {
                self.flow[e]
            };
            if d <= self.delta {
                self.delta = d;
                self.u_out = u;
                result = 2;
            }
            u = self.parent[u];
        }
        if result == 1 {
            self.u_in = first;
            self.v_in = second;
        } else {
            self.u_in = second;
            self.v_in = first;
        }
        // Real arcs are finite, so delta is bounded by the entering arc.
        debug_assert!(self.delta < INF);
        result != 0
    }

    fn change_flow(&mut self, change: bool) {
        if self.delta > 0 {
            let val = self.state[self.in_arc] as i64 * self.delta;
            self.flow[self.in_arc] += val;
            let mut u = self.source[self.in_arc];
            while u != self.join {
                let e = self.pred[u];
                self.flow[e] -= self.pred_dir[u] as i64 * val;
                u = self.parent[u];
            }
            let mut u = self.target[self.in_arc];
            while u != self.join {
                let e = self.pred[u];
                self.flow[e] += self.pred_dir[u] as i64 * val;
                u = self.parent[u];
            }
        }
        if change {
            self.state[self.in_arc] = STATE_TREE;
            let out = self.pred[self.u_out];
            self.state[out] = if self.flow[out] == 0 {
                STATE_LOWER
            } else {
                STATE_UPPER
            };
        } else {
            self.state[self.in_arc] = -self.state[self.in_arc];
        }
    }

    fn update_tree_structure(&mut self) {
        let u_in = self.u_in;
        let v_in = self.v_in;
        let u_out = self.u_out;
        let join = self.join;
        let in_arc = self.in_arc;
        let old_rev_thread = self.rev_thread[u_out];
        let old_succ_num = self.succ_num[u_out];
        let old_last_succ = self.last_succ[u_out];
        let v_out = self.parent[u_out];

        if u_in == u_out {
            self.parent[u_in] = v_in;
            self.pred[u_in] = in_arc;
            self.pred_dir[u_in] = if u_in == self.source[in_arc] {
                DIR_UP
            } else {
                DIR_DOWN
            };

            if self.thread[v_in] != u_out {
                let mut after = self.thread[old_last_succ];
                self.thread[old_rev_thread] = after;
                self.rev_thread[after] = old_rev_thread;
                after = self.thread[v_in];
                self.thread[v_in] = u_out;
                self.rev_thread[u_out] = v_in;
                self.thread[old_last_succ] = after;
                self.rev_thread[after] = old_last_succ;
            }
        } else {
            let thread_continue = if old_rev_thread == v_in {
                self.thread[old_last_succ]
            } else {
                self.thread[v_in]
            };

            let mut stem = u_in;
            let mut par_stem = v_in;
            let mut last = self.last_succ[u_in];
            let mut after = self.thread[last];
            self.thread[v_in] = u_in;
            self.dirty_revs.clear();
            self.dirty_revs.push(v_in);
            while stem != u_out {
                let next_stem = self.parent[stem];
                self.thread[last] = next_stem;
                self.dirty_revs.push(last);

                let before = self.rev_thread[stem];
                self.thread[before] = after;
                self.rev_thread[after] = before;

                self.parent[stem] = par_stem;
                par_stem = stem;
                stem = next_stem;

                last = if self.last_succ[stem] == self.last_succ[par_stem] {
                    self.rev_thread[par_stem]
                } else {
                    self.last_succ[stem]
                };
                after = self.thread[last];
            }
            self.parent[u_out] = par_stem;
            self.thread[last] = thread_continue;
            self.rev_thread[thread_continue] = last;
            self.last_succ[u_out] = last;

            if old_rev_thread != v_in {
                self.thread[old_rev_thread] = after;
                self.rev_thread[after] = old_rev_thread;
            }

            for i in 0..self.dirty_revs.len() {
                let u = self.dirty_revs[i];
                let t = self.thread[u];
                self.rev_thread[t] = u;
            }

            let mut tmp_sc = 0usize;
            let tmp_ls = self.last_succ[u_out];
            let mut u = u_out;
            while u != u_in {
                let p = self.parent[u];
                self.pred[u] = self.pred[p];
                self.pred_dir[u] = -self.pred_dir[p];
                tmp_sc = tmp_sc + self.succ_num[u] - self.succ_num[p];
                self.succ_num[u] = tmp_sc;
                self.last_succ[p] = tmp_ls;
                u = p;
            }
            self.pred[u_in] = in_arc;
            self.pred_dir[u_in] = if u_in == self.source[in_arc] {
                DIR_UP
            } else {
                DIR_DOWN
            };
            self.succ_num[u_in] = old_succ_num;
        }

        let up_limit_out = if self.last_succ[join] == v_in {
            join
        } else {
            NONE
        };
        let last_succ_out = self.last_succ[u_out];
        let mut u = v_in;
        while u != NONE && self.last_succ[u] == v_in {
            self.last_succ[u] = last_succ_out;
            u = self.parent[u];
        }

        if join != old_rev_thread && v_in != old_rev_thread {
            let mut u = v_out;
            while u != up_limit_out && self.last_succ[u] == old_last_succ {
                self.last_succ[u] = old_rev_thread;
                u = self.parent[u];
            }
        } else if last_succ_out != old_last_succ {
            let mut u = v_out;
            while u != up_limit_out && self.last_succ[u] == old_last_succ {
                self.last_succ[u] = last_succ_out;
                u = self.parent[u];
            }
        }

        let mut u = v_in;
        while u != join {
            self.succ_num[u] += old_succ_num;
            u = self.parent[u];
        }
        let mut u = v_out;
        while u != join {
            self.succ_num[u] -= old_succ_num;
            u = self.parent[u];
        }
    }

    fn update_potential(&mut self) {
        let dir = C::from_i64(self.pred_dir[self.u_in] as i64);
        let sigma = self.pi[self.v_in] - self.pi[self.u_in] - dir * self.cost[self.in_arc];
        let end = self.thread[self.last_succ[self.u_in]];
        let mut u = self.u_in;
        while u != end {
            self.pi[u] = self.pi[u] + sigma;
            u = self.thread[u];
        }
    }

    /// Checks every spanning-tree invariant; returns the first broken one.
    #[cfg(test)]
    pub(crate) fn check_tree(&self) -> Result<(), String> {
        let n = self.node_num + 1;
        let root = self.root;
        // Thread visits every node exactly once, starting at the root.
        let mut seen = vec![false; n];
        let mut order = Vec::with_capacity(n);
        let mut u = root;
        for _ in 0..n {
            if seen[u] {
                return Err(format!("thread revisits {u}"));
            }
            seen[u] = true;
            order.push(u);
            if self.rev_thread[self.thread[u]] != u {
                return Err(format!("rev_thread inconsistent at {u}"));
            }
            u = self.thread[u];
        }
        if u != root {
            return Err("thread does not close at the root".into());
        }
        let mut pos = vec![0; n];
        for (k, &v) in order.iter().enumerate() {
            pos[v] = k;
        }
        // Subtree sizes and last successors.
        let mut size = vec![1usize; n];
        for &v in order.iter().rev() {
            if v != root {
                size[self.parent[v]] += size[v];
            }
        }
        for v in 0..n {
            if self.succ_num[v] != size[v] {
                return Err(format!(
                    "succ_num[{v}] = {}, expected {}",
                    self.succ_num[v], size[v]
                ));
            }
            let last = order[pos[v] + size[v] - 1];
            if self.last_succ[v] != last {
                return Err(format!(
                    "last_succ[{v}] = {}, expected {last}",
                    self.last_succ[v]
                ));
            }
            if v != root {
                let p = self.parent[v];
                if !(pos[p] < pos[v] && pos[v] < pos[p] + size[p]) {
                    return Err(format!("{v} not inside the thread block of its parent"));
                }
                let e = self.pred[v];
                let ok = match self.pred_dir[v] {
                    DIR_UP => self.source[e] == v && self.target[e] == p,
                    DIR_DOWN => self.source[e] == p && self.target[e] == v,
                    _ => false,
                };
                if !ok || self.state[e] != STATE_TREE {
                    return Err(format!("pred arc of {v} inconsistent"));
                }
                if self.reduced(e) != C::ZERO {
                    return Err(format!("tree arc {e} has nonzero reduced cost"));
                }
            }
        }
        for e in 0..self.cap.len() {
            if self.flow[e] < 0 || self.flow[e] > self.cap[e] {
                return Err(format!("arc {e} flow out of bounds"));
            }
            match self.state[e] {
                STATE_LOWER if self.flow[e] != 0 => {
                    return Err(format!("lower arc {e} carries flow"))
                }
                STATE_UPPER if self.flow[e] != self.cap[e] => {
                    return Err(format!("upper arc {e} not saturated"))
                }
                _ => {}
            }
        }
        let tree_arcs = self.state.iter().filter(|&&s| s == STATE_TREE).count();
        if tree_arcs != self.node_num {
            return Err(format!("{tree_arcs} tree arcs for {} nodes", self.node_num));
        }
        Ok(())
    }

    /// Runs the pivot loop, checking the tree after every pivot.
    #[cfg(test)]
    pub(crate) fn run_checked(&mut self) -> Result<Outcome, String> {
        self.check_tree()?;
        while self.find_entering_arc() {
            self.find_join_node();
            let change = self.find_leaving_arc();
            self.change_flow(change);
            if change {
                self.update_tree_structure();
                self.update_potential();
            }
            self.check_tree()?;
        }
        Ok(self.run())
    }
}
