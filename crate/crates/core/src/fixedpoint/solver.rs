//! Conflict-driven clause-learning SAT solver.
//!
//! Small but complete: two-literal watching with dedicated binary-clause
//! lists, first-UIP conflict analysis with self-subsumption minimization,
//! activity-driven or fixed-order decisions, phase saving, Luby restarts,
//! periodic reduction of the learned-clause store, and incremental clause
//! addition between solves. The fixed-order policy decides the given
//! variables lowest index first with false before true and never applies
//! phase saving, which makes the first model found the lexicographically
//! least one; learned clauses only ever exclude assignments that satisfy
//! nothing, so pruning cannot skip a model.
//!
//! The conflict budget makes long runs abort deterministically: the same
//! formula and budget always give the same outcome.

/// Propositional variable, numbered from 0.
pub type Var = u32;

/// A literal: variable plus sign.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Lit(u32);

impl Lit {
    pub fn pos(v: Var) -> Lit {
        Lit(v << 1)
    }

    pub fn neg(v: Var) -> Lit {
        Lit((v << 1) | 1)
    }

    pub fn with_sign(v: Var, negated: bool) -> Lit {
        Lit((v << 1) | u32::from(negated))
    }

    pub fn var(self) -> Var {
        self.0 >> 1
    }

    pub fn is_neg(self) -> bool {
        self.0 & 1 == 1
    }

    pub fn negate(self) -> Lit {
        Lit(self.0 ^ 1)
    }

    fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveOutcome {
    Sat,
    Unsat,
    BudgetExceeded,
}

/// Decision policy. `Fixed` holds the variables eligible for decisions, in
/// order; every other variable must become assigned by propagation.
#[derive(Debug, Clone)]
pub enum Policy {
    Activity,
    Fixed(Vec<Var>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct ClauseRef(u32);

/// Reason tag for an assignment: `NO_REASON` for decisions and root facts,
/// the binary bit plus a partner literal for two-literal clauses, or a
/// clause index. `NO_REASON` also has the binary bit set, so it must be
/// tested first; keeping variables below 2^30 leaves the bit free.
const NO_REASON: u32 = u32::MAX;
const BINARY_TAG: u32 = 1 << 31;

fn binary_reason(other: Lit) -> u32 {
    BINARY_TAG | other.0
}

#[derive(Clone, Copy)]
struct Watch {
    cref: ClauseRef,
    blocker: Lit,
}

/// A conflicting clause as found by propagation.
#[derive(Clone, Copy)]
enum Conflict {
    Long(ClauseRef),
    Binary([Lit; 2]),
}

struct Header {
    start: u32,
    len: u32,
    /// 0 for problem clauses, which are permanent; learned clauses carry
    /// their literal-block distance and may be dropped during reduction.
    lbd: u32,
}

struct ClauseDb {
    arena: Vec<Lit>,
    headers: Vec<Header>,
}

impl ClauseDb {
    fn add(&mut self, lits: &[Lit], lbd: u32) -> ClauseRef {
        let start = self.arena.len() as u32;
        self.arena.extend_from_slice(lits);
        self.headers.push(Header { start, len: lits.len() as u32, lbd });
        ClauseRef(self.headers.len() as u32 - 1)
    }

    fn lits(&self, c: ClauseRef) -> &[Lit] {
        let h = &self.headers[c.0 as usize];
        &self.arena[h.start as usize..(h.start + h.len) as usize]
    }

    fn lits_mut(&mut self, c: ClauseRef) -> &mut [Lit] {
        let h = &self.headers[c.0 as usize];
        &mut self.arena[h.start as usize..(h.start + h.len) as usize]
    }
}

/// Max-heap over variables keyed by activity.
struct VarHeap {
    heap: Vec<Var>,
    position: Vec<u32>,
}

const NOT_IN_HEAP: u32 = u32::MAX;

impl VarHeap {
    fn new(n: usize) -> Self {
        VarHeap { heap: Vec::with_capacity(n), position: vec![NOT_IN_HEAP; n] }
    }

    fn contains(&self, v: Var) -> bool {
        self.position[v as usize] != NOT_IN_HEAP
    }

    fn insert(&mut self, v: Var, activity: &[f64]) {
        if self.contains(v) {
            return;
        }
        self.position[v as usize] = self.heap.len() as u32;
        self.heap.push(v);
        self.sift_up(self.heap.len() - 1, activity);
    }

    fn pop(&mut self, activity: &[f64]) -> Option<Var> {
        let top = *self.heap.first()?;
        self.position[top as usize] = NOT_IN_HEAP;
        let last = self.heap.pop().expect("non-empty");
        if !self.heap.is_empty() {
            self.heap[0] = last;
            self.position[last as usize] = 0;
            self.sift_down(0, activity)
        }
        Some(top)
    }

    fn bumped(&mut self, v: Var, activity: &[f64]) {
        if let Some(&pos) = self
            .position
            .get(v as usize)
            .filter(|&&p| p != NOT_IN_HEAP)
        {
            self.sift_up(pos as usize, activity);
        }
    }

    fn sift_up(&mut self, mut i: usize, activity: &[f64]) {
        while i > 0 {
            let parent = (i - 1) / 2;
            if activity[self.heap[i] as usize] <= activity[self.heap[parent] as usize] {
                break;
            }
            self.swap(i, parent);
            i = parent;
        }
    }

    fn sift_down(&mut self, mut i: usize, activity: &[f64]) {
        loop {
            let l = 2 * i + 1;
            if l >= self.heap.len() {
                break;
            }
            let r = l + 1;
            let mut best = l;
            if r < self.heap.len()
                && activity[self.heap[r] as usize] > activity[self.heap[l] as usize]
            {
                best = r;
            }
            if activity[self.heap[best] as usize] <= activity[self.heap[i] as usize] {
                break;
            }
            self.swap(i, best);
            i = best;
        }
    }

    fn swap(&mut self, a: usize, b: usize) {
        self.heap.swap(a, b);
        self.position[self.heap[a] as usize] = a as u32;
        self.position[self.heap[b] as usize] = b as u32;
    }
}

pub struct Solver {
    num_vars: u32,
    db: ClauseDb,
    watches: Vec<Vec<Watch>>,
    /// Partner literals of two-literal clauses, keyed by the falsified
    /// literal's negation. Binary clauses live here instead of the arena
    /// and are never deleted.
    bin_watches: Vec<Vec<Lit>>,
    /// Per variable: None undecided, Some(v) assigned.
    assign: Vec<Option<bool>>,
    level: Vec<u32>,
    reason: Vec<u32>,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    policy: Policy,
    activity: Vec<f64>,
    var_inc: f64,
    heap: VarHeap,
    phase: Vec<bool>,
    seen: Vec<bool>,
    conflicts: u64,
    last_reduce: u64,
    reduce_interval: u64,
    ok: bool,
}

impl Solver {
    pub fn new(num_vars: u32, policy: Policy) -> Self {
        assert!(num_vars < (1 << 30), "variable space exceeded");
        let n = num_vars as usize;
        let mut heap = VarHeap::new(n);
        let activity = vec![0.0; n];
        if matches!(policy, Policy::Activity) {
            for v in 0..num_vars {
                heap.insert(v, &activity);
            }
        }
        Solver {
            num_vars,
            db: ClauseDb { arena: Vec::new(), headers: Vec::new() },
            watches: vec![Vec::new(); 2 * n],
            bin_watches: vec![Vec::new(); 2 * n],
            assign: vec![None; n],
            level: vec![0; n],
            reason: vec![NO_REASON; n],
            trail: Vec::new(),
            trail_lim: Vec::new(),
            qhead: 0,
            policy,
            activity,
            var_inc: 1.0,
            heap,
            phase: vec![false; n],
            seen: vec![false; n],
            conflicts: 0,
            last_reduce: 0,
            reduce_interval: 2000,
            ok: true,
        }
    }

    pub fn num_conflicts(&self) -> u64 {
        self.conflicts
    }

    fn value(&self, l: Lit) -> Option<bool> {
        self.assign[l.var() as usize].map(|v| v != l.is_neg())
    }

    fn decision_level(&self) -> u32 {
        self.trail_lim.len() as u32
    }

    /// Adds a clause. May be called before the first solve or between
    /// solves; the solver backtracks to the root level first.
    pub fn add_clause(&mut self, lits: &[Lit]) {
        if !self.ok {
            return;
        }
        self.backtrack(0);
        // Root-level simplification: drop false literals, detect satisfied
        // or tautological clauses, deduplicate.
        let mut cleaned: Vec<Lit> = Vec::with_capacity(lits.len());
        for &l in lits {
            debug_assert!(l.var() < self.num_vars);
            match self.value(l) {
                Some(true) => return,
                Some(false) => continue,
                None => {
                    if cleaned.contains(&l.negate()) {
                        return;
                    }
                    if !cleaned.contains(&l) {
                        cleaned.push(l);
                    }
                }
            }
        }
        match cleaned.len() {
            0 => self.ok = false,
            1 => {
                self.enqueue(cleaned[0], NO_REASON);
                if self.propagate().is_some() {
                    self.ok = false;
                }
            }
            2 => {
                self.add_binary(cleaned[0], cleaned[1]);
            }
            _ => {
                let cref = self.db.add(&cleaned, 0);
                self.watch_clause(cref);
            }
        }
    }

    fn add_binary(&mut self, a: Lit, b: Lit) {
        self.bin_watches[a.negate().index()].push(b);
        self.bin_watches[b.negate().index()].push(a);
    }

    fn watch_clause(&mut self, cref: ClauseRef) {
        let lits = self.db.lits(cref);
        let (w0, w1) = (lits[0], lits[1]);
        self.watches[w0.negate().index()].push(Watch { cref, blocker: w1 });
        self.watches[w1.negate().index()].push(Watch { cref, blocker: w0 });
    }

    fn enqueue(&mut self, l: Lit, reason: u32) {
        debug_assert!(self.value(l).is_none());
        let v = l.var() as usize;
        self.assign[v] = Some(!l.is_neg());
        self.level[v] = self.decision_level();
        self.reason[v] = reason;
        self.trail.push(l);
    }

    fn propagate(&mut self) -> Option<Conflict> {
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            let pi = p.index();
            // Binary implications first: no arena traffic, and resolving
            // them early keeps the queue dense.
            let mut k = 0;
            while k < self.bin_watches[pi].len() {
                let other = self.bin_watches[pi][k];
                match self.value(other) {
                    Some(true) => {}
                    Some(false) => {
                        self.qhead = self.trail.len();
                        return Some(Conflict::Binary([p.negate(), other]));
                    }
                    None => self.enqueue(other, binary_reason(p.negate())),
                }
                k += 1;
            }
            let mut i = 0;
            'watches: while i < self.watches[pi].len() {
                let Watch { cref, blocker } = self.watches[pi][i];
                if self.value(blocker) == Some(true) {
                    i += 1;
                    continue;
                }
                // Normalize so the falsified literal sits at slot 1.
                let false_lit = p.negate();
                {
                    let lits = self.db.lits_mut(cref);
                    if lits[0] == false_lit {
                        lits.swap(0, 1);
                    }
                }
                let first = self.db.lits(cref)[0];
                if first != blocker && self.value(first) == Some(true) {
                    self.watches[pi][i] = Watch { cref, blocker: first };
                    i += 1;
                    continue;
                }
                // Look for a replacement watch.
                let len = self.db.lits(cref).len();
                for k in 2..len {
                    let cand = self.db.lits(cref)[k];
                    if self.value(cand) != Some(false) {
                        self.db.lits_mut(cref).swap(1, k);
                        self.watches[pi].swap_remove(i);
                        self.watches[cand.negate().index()].push(Watch { cref, blocker: first });
                        continue 'watches;
                    }
                }
                // No replacement: unit or conflict.
                if self.value(first) == Some(false) {
                    self.qhead = self.trail.len();
                    return Some(Conflict::Long(cref));
                }
                self.enqueue(first, cref.0);
                i += 1;
            }
        }
        None
    }

    fn backtrack(&mut self, target: u32) {
        while self.decision_level() > target {
            let boundary = self.trail_lim.pop().expect("level exists");
            while self.trail.len() > boundary {
                let l = self.trail.pop().expect("trail entry");
                let v = l.var() as usize;
                self.phase[v] = !l.is_neg();
                self.assign[v] = None;
                self.reason[v] = NO_REASON;
                if matches!(self.policy, Policy::Activity) {
                    self.heap.insert(l.var(), &self.activity);
                }
            }
        }
        self.qhead = self.trail.len();
    }

    fn bump(&mut self, v: Var) {
        self.activity[v as usize] += self.var_inc;
        if self.activity[v as usize] > 1e100 {
            for a in &mut self.activity {
                *a *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
        self.heap.bumped(v, &self.activity);
    }

    /// First-UIP learning. Returns the learnt clause (asserting literal
    /// first), the backjump level, and the clause's literal-block distance.
    fn analyze(&mut self, conflict: Conflict) -> (Vec<Lit>, u32, u32) {
        let mut learnt: Vec<Lit> = Vec::new();
        let mut counter = 0usize;
        let mut trail_index = self.trail.len();
        let mut buf: Vec<Lit> = Vec::with_capacity(8);
        match conflict {
            Conflict::Long(c) => buf.extend_from_slice(self.db.lits(c)),
            Conflict::Binary(two) => buf.extend_from_slice(&two),
        }
        let uip = loop {
            for k in 0..buf.len() {
                let q = buf[k];
                let v = q.var() as usize;
                if self.seen[v] || self.level[v] == 0 {
                    continue;
                }
                self.seen[v] = true;
                self.bump(q.var());
                if self.level[v] == self.decision_level() {
                    counter += 1;
                } else {
                    learnt.push(q);
                }
            }
            // Walk back to the next marked literal on the trail.
            loop {
                trail_index -= 1;
                if self.seen[self.trail[trail_index].var() as usize] {
                    break;
                }
            }
            let lit = self.trail[trail_index];
            self.seen[lit.var() as usize] = false;
            counter -= 1;
            if counter == 0 {
                break lit;
            }
            let tag = self.reason[lit.var() as usize];
            debug_assert_ne!(tag, NO_REASON, "non-UIP marks are propagated literals");
            buf.clear();
            if tag & BINARY_TAG != 0 {
                buf.push(Lit(tag & !BINARY_TAG));
            } else {
                buf.extend_from_slice(&self.db.lits(ClauseRef(tag))[1..]);
            }
        };
        // Self-subsumption: a literal whose entire reason already sits in
        // the clause (or at the root) adds nothing.
        let mut kept: Vec<Lit> = Vec::with_capacity(learnt.len() + 1);
        kept.push(uip.negate());
        for &l in &learnt {
            if !self.redundant(l) {
                kept.push(l);
            }
        }
        for &l in &learnt {
            self.seen[l.var() as usize] = false;
        }
        let backjump = kept[1..]
            .iter()
            .map(|l| self.level[l.var() as usize])
            .max()
            .unwrap_or(0);
        let lbd = self.literal_block_distance(&kept);
        (kept, backjump, lbd)
    }

    /// Whether a learnt literal is implied by the rest of the clause. The
    /// `seen` marks of the learnt literals must still be set.
    fn redundant(&self, l: Lit) -> bool {
        let covered = |q: Lit| {
            let v = q.var() as usize;
            self.level[v] == 0 || self.seen[v]
        };
        let tag = self.reason[l.var() as usize];
        if tag == NO_REASON {
            false
        } else if tag & BINARY_TAG != 0 {
            covered(Lit(tag & !BINARY_TAG))
        } else {
            self.db.lits(ClauseRef(tag))[1..].iter().copied().all(covered)
        }
    }

    fn literal_block_distance(&self, lits: &[Lit]) -> u32 {
        let mut levels: Vec<u32> = lits
            .iter()
            .map(|l| self.level[l.var() as usize])
            .collect();
        levels.sort_unstable();
        levels.dedup();
        levels.len() as u32
    }

    /// Rebuilds the clause store at the root: drops half of the weak
    /// learned clauses, removes clauses satisfied at level zero, strips
    /// falsified literals, and demotes shortened clauses to the binary
    /// lists. Triggered between restarts on a conflict schedule, so the
    /// outcome stays a pure function of the input formula.
    fn reduce_learned(&mut self) {
        debug_assert_eq!(self.decision_level(), 0);
        // Clause indices are about to move; root assignments are permanent
        // facts whose reasons analysis never reads.
        for &l in &self.trail {
            self.reason[l.var() as usize] = NO_REASON;
        }
        let mut weak: Vec<(u32, u32, u32)> = self
            .db
            .headers
            .iter()
            .enumerate()
            .filter(|(_, h)| h.lbd > 3)
            .map(|(idx, h)| (h.lbd, h.len, idx as u32))
            .collect();
        weak.sort_unstable();
        let mut discard = vec![false; self.db.headers.len()];
        for &(_, _, idx) in &weak[weak.len() / 2..] {
            discard[idx as usize] = true;
        }
        let old_headers = std::mem::take(&mut self.db.headers);
        let old_arena = std::mem::take(&mut self.db.arena);
        let mut scratch: Vec<Lit> = Vec::new();
        'clauses: for (idx, h) in old_headers.iter().enumerate() {
            if discard[idx] {
                continue;
            }
            let lits = &old_arena[h.start as usize..(h.start + h.len) as usize];
            scratch.clear();
            for &l in lits {
                match self.value(l) {
                    Some(true) => continue 'clauses,
                    Some(false) => {}
                    None => scratch.push(l),
                }
            }
            match scratch.len() {
                // Root propagation has already run to fixpoint, so no
                // clause can be empty or unit here.
                0 | 1 => unreachable!("unsimplified clause at the root"),
                2 => self.add_binary(scratch[0], scratch[1]),
                _ => {
                    self.db.add(&scratch, h.lbd);
                }
            }
        }
        for w in &mut self.watches {
            w.clear();
        }
        for i in 0..self.db.headers.len() {
            self.watch_clause(ClauseRef(i as u32));
        }
        // A root-assigned trigger literal retires its binary list; for live
        // lists, satisfied partners can never matter again.
        for code in 0..self.bin_watches.len() {
            if self.value(Lit(code as u32)).is_some() {
                self.bin_watches[code].clear();
            } else {
                let assign = &self.assign;
                self.bin_watches[code]
                    .retain(|b| assign[b.var() as usize].map(|v| v != b.is_neg()) != Some(true));
            }
        }
    }

    fn pick_decision(&mut self) -> Option<Lit> {
        match &self.policy {
            Policy::Fixed(order) => {
                for &v in order {
                    if self.assign[v as usize].is_none() {
                        return Some(Lit::neg(v));
                    }
                }
                debug_assert!(
                    self.assign.iter().all(Option::is_some),
                    "propagation must finish off non-decision variables"
                );
                None
            }
            Policy::Activity => {
                while let Some(v) = self.heap.pop(&self.activity) {
                    if self.assign[v as usize].is_none() {
                        return Some(Lit::with_sign(v, !self.phase[v as usize]));
                    }
                }
                None
            }
        }
    }

    /// Runs the search. `budget` bounds the number of conflicts in this call.
    pub fn solve(&mut self, budget: Option<u64>) -> SolveOutcome {
        if !self.ok {
            return SolveOutcome::Unsat;
        }
        self.backtrack(0);
        if self.propagate().is_some() {
            self.ok = false;
            return SolveOutcome::Unsat;
        }
        let start_conflicts = self.conflicts;
        let mut restart_unit = 0u64;
        let mut limit = luby(restart_unit) * 256;
        let mut since_restart = 0u64;
        loop {
            match self.propagate() {
                Some(conflict) => {
                    self.conflicts += 1;
                    since_restart += 1;
                    if self.decision_level() == 0 {
                        self.ok = false;
                        return SolveOutcome::Unsat;
                    }
                    if let Some(b) = budget {
                        if self.conflicts - start_conflicts >= b {
                            self.backtrack(0);
                            return SolveOutcome::BudgetExceeded;
                        }
                    }
                    let (learnt, backjump, lbd) = self.analyze(conflict);
                    self.backtrack(backjump);
                    match learnt.len() {
                        1 => self.enqueue(learnt[0], NO_REASON),
                        2 => {
                            self.add_binary(learnt[0], learnt[1]);
                            self.enqueue(learnt[0], binary_reason(learnt[1]));
                        }
                        _ => {
                            let cref = self.db.add(&learnt, lbd);
                            self.watch_clause(cref);
                            self.enqueue(learnt[0], cref.0);
                        }
                    }
                    self.var_inc /= 0.90;
                }
                None => {
                    if since_restart >= limit {
                        since_restart = 0;
                        restart_unit += 1;
                        limit = luby(restart_unit) * 256;
                        self.backtrack(0);
                        if self.conflicts - self.last_reduce >= self.reduce_interval {
                            self.reduce_learned();
                            self.last_reduce = self.conflicts;
                            self.reduce_interval += 500;
                        }
                        continue;
                    }
                    match self.pick_decision() {
                        None => return SolveOutcome::Sat,
                        Some(l) => {
                            self.trail_lim.push(self.trail.len());
                            self.enqueue(l, NO_REASON);
                        }
                    }
                }
            }
        }
    }

    /// Value of `v` in the current model. Valid right after a Sat outcome.
    pub fn model_value(&self, v: Var) -> bool {
        self.assign[v as usize].expect("model query after Sat")
    }

    #[cfg(test)]
    fn set_reduce_interval(&mut self, interval: u64) {
        self.reduce_interval = interval;
    }
}

/// Luby restart sequence: 1 1 2 1 1 2 4 1 1 2 1 1 2 4 8 ...
fn luby(x: u64) -> u64 {
    let mut size = 1u64;
    let mut seq = 0u32;
    while size < x + 1 {
        seq += 1;
        size = 2 * size + 1;
    }
    let mut x = x;
    while size - 1 != x {
        size = (size - 1) >> 1;
        seq -= 1;
        x %= size;
    }
    1u64 << seq.min(63)
}
