# cython: language_level=3, boundscheck=False, wraparound=False
"""Conflict-driven clause-learning SAT kernel with an assumption interface.

MiniSat-style two-watched-literal propagation, first-UIP clause learning,
activity-based decisions with deterministic tie-breaking, phase saving and
Luby restarts. There is no randomness anywhere: identical clause streams and
identical assumption lists always produce identical behaviour.

External literals are signed 1-indexed ints (DIMACS convention); internally
a literal is ``2*v`` (positive) or ``2*v + 1`` (negative).

This file is valid plain Python and is also compiled by Cython in
pure-Python mode when the extension build is enabled; ``COMPILED`` reports
which version is running.
"""

try:
    import cython

    COMPILED = cython.compiled
except ImportError:  # pragma: no cover
    COMPILED = False

SAT = 1
UNSAT = 0
UNKNOWN = -1

_RESCALE = 1e100
_INV_RESCALE = 1e-100
_VAR_DECAY = 1.0 / 0.95
_RESTART_BASE = 100


def _luby(i):
    # Luby et al. restart sequence: 1 1 2 1 1 2 4 ...
    k = 1
    while (1 << k) - 1 < i:
        k += 1
    while (1 << k) - 1 != i:
        k -= 1
        i -= (1 << k) - 1
    return 1 << (k - 1)


class Solver:
    """One solver instance owns mutable state; reuse keeps learned clauses."""

    def __init__(self, num_vars=0):
        self.ok = True
        self.num_vars = 0
        self.clauses = []
        self.watches = [[], []]
        self.assigns = [-1]
        self.level = [0]
        self.reason = [-1]
        self.phase = [0]
        self.activity = [0.0]
        self.seen = [0]
        self.trail = []
        self.trail_lim = []
        self.qhead = 0
        self.var_inc = 1.0
        self.conflict_count = 0
        self.model = None
        if num_vars:
            self.ensure_vars(num_vars)

    def ensure_vars(self, n):
        while self.num_vars < n:
            self.num_vars += 1
            self.assigns.append(-1)
            self.level.append(0)
            self.reason.append(-1)
            self.phase.append(0)
            self.activity.append(0.0)
            self.seen.append(0)
            self.watches.append([])
            self.watches.append([])

    # -- literal helpers ---------------------------------------------------

    def _lit_value(self, l):
        va = self.assigns[l >> 1]
        if va < 0:
            return -1
        return va ^ (l & 1)

    def _enqueue(self, l, reason_ci):
        v = l >> 1
        self.assigns[v] = (l & 1) ^ 1
        self.level[v] = len(self.trail_lim)
        self.reason[v] = reason_ci
        self.trail.append(l)

    # -- clause management ---------------------------------------------------

    def add_clause(self, lits):
        """Add a clause of signed external literals; call only at level 0."""
        if not self.ok:
            return False
        for l in lits:
            v = l if l > 0 else -l
            self.ensure_vars(v)
        internal = []
        seen_here = set()
        for l in lits:
            il = (l << 1) if l > 0 else (((-l) << 1) | 1)
            if il ^ 1 in seen_here:
                return True  # tautology
            if il in seen_here:
                continue
            val = self._lit_value(il)
            if val == 1 and self.level[il >> 1] == 0:
                return True  # already satisfied forever
            if val == 0 and self.level[il >> 1] == 0:
                continue  # falsified forever, drop literal
            seen_here.add(il)
            internal.append(il)
        if not internal:
            self.ok = False
            return False
        if len(internal) == 1:
            l = internal[0]
            if self._lit_value(l) == 0:
                self.ok = False
                return False
            if self._lit_value(l) == -1:
                self._enqueue(l, -1)
            return True
        ci = len(self.clauses)
        self.clauses.append(internal)
        self.watches[internal[0]].append(ci)
        self.watches[internal[1]].append(ci)
        return True

    # -- propagation ---------------------------------------------------------

    def _propagate(self):
        while self.qhead < len(self.trail):
            p = self.trail[self.qhead]
            self.qhead += 1
            false_lit = p ^ 1
            ws = self.watches[false_lit]
            new_ws = []
            n = len(ws)
            i = 0
            confl = -1
            while i < n:
                ci = ws[i]
                i += 1
                clause = self.clauses[ci]
                if clause[0] == false_lit:
                    clause[0] = clause[1]
                    clause[1] = false_lit
                first = clause[0]
                v0 = self._lit_value(first)
                if v0 == 1:
                    new_ws.append(ci)
                    continue
                found = 0
                k = 2
                m = len(clause)
                while k < m:
                    lk = clause[k]
                    if self._lit_value(lk) != 0:
                        clause[1] = lk
                        clause[k] = false_lit
                        self.watches[lk].append(ci)
                        found = 1
                        break
                    k += 1
                if found:
                    continue
                new_ws.append(ci)
                if v0 == 0:
                    confl = ci
                    while i < n:
                        new_ws.append(ws[i])
                        i += 1
                    self.qhead = len(self.trail)
                    break
                self._enqueue(first, ci)
            self.watches[false_lit] = new_ws
            if confl >= 0:
                return confl
        return -1

    # -- conflict analysis -----------------------------------------------------

    def _bump(self, v):
        self.activity[v] += self.var_inc
        if self.activity[v] > _RESCALE:
            for u in range(1, self.num_vars + 1):
                self.activity[u] *= _INV_RESCALE
            self.var_inc *= _INV_RESCALE

    def _analyze(self, confl):
        learnt = [0]
        counter = 0
        p = -1
        idx = len(self.trail) - 1
        cur_level = len(self.trail_lim)
        while True:
            clause = self.clauses[confl]
            start = 0 if p == -1 else 1
            for j in range(start, len(clause)):
                q = clause[j]
                v = q >> 1
                if not self.seen[v] and self.level[v] > 0:
                    self.seen[v] = 1
                    self._bump(v)
                    if self.level[v] >= cur_level:
                        counter += 1
                    else:
                        learnt.append(q)
            while not self.seen[self.trail[idx] >> 1]:
                idx -= 1
            p = self.trail[idx]
            idx -= 1
            v = p >> 1
            self.seen[v] = 0
            counter -= 1
            if counter == 0:
                break
            confl = self.reason[v]
        learnt[0] = p ^ 1
        for q in learnt:
            self.seen[q >> 1] = 0
        if len(learnt) == 1:
            return learnt, 0
        # move the max-level literal into the second watch position
        max_i = 1
        max_lv = self.level[learnt[1] >> 1]
        for j in range(2, len(learnt)):
            lv = self.level[learnt[j] >> 1]
            if lv > max_lv:
                max_lv = lv
                max_i = j
        learnt[1], learnt[max_i] = learnt[max_i], learnt[1]
        return learnt, max_lv

    def _cancel_until(self, lvl):
        if len(self.trail_lim) <= lvl:
            return
        bound = self.trail_lim[lvl]
        for i in range(len(self.trail) - 1, bound - 1, -1):
            v = self.trail[i] >> 1
            self.phase[v] = self.assigns[v]
            self.assigns[v] = -1
            self.reason[v] = -1
        del self.trail[bound:]
        del self.trail_lim[lvl:]
        self.qhead = len(self.trail)

    def _pick_branch(self):
        best = -1
        best_act = -1.0
        for v in range(1, self.num_vars + 1):
            if self.assigns[v] < 0 and self.activity[v] > best_act:
                best_act = self.activity[v]
                best = v
        return best

    # -- main search -------------------------------------------------------------

    def solve(self, assumptions=(), conflict_budget=-1):
        """Return SAT/UNSAT/UNKNOWN; UNKNOWN means the budget ran out.

        ``assumptions`` are signed external literals treated as temporary
        decisions: UNSAT means unsatisfiable under them (or globally when
        they are empty). Learned clauses are kept across calls.
        """
        if not self.ok:
            return UNSAT
        self._cancel_until(0)
        self.model = None
        conflicts = 0
        restart_idx = 1
        restart_limit = _RESTART_BASE * _luby(1)
        since_restart = 0
        n_assumps = len(assumptions)
        internal_assumps = []
        for l in assumptions:
            v = l if l > 0 else -l
            self.ensure_vars(v)
            internal_assumps.append((l << 1) if l > 0 else (((-l) << 1) | 1))
        while True:
            confl = self._propagate()
            if confl >= 0:
                conflicts += 1
                since_restart += 1
                self.conflict_count += 1
                if len(self.trail_lim) == 0:
                    self.ok = False
                    return UNSAT
                if conflict_budget >= 0 and conflicts > conflict_budget:
                    self._cancel_until(0)
                    return UNKNOWN
                learnt, bt = self._analyze(confl)
                self._cancel_until(bt)
                if len(learnt) == 1:
                    if self._lit_value(learnt[0]) == 0:
                        self.ok = False
                        return UNSAT
                    if self._lit_value(learnt[0]) == -1:
                        self._enqueue(learnt[0], -1)
                else:
                    ci = len(self.clauses)
                    self.clauses.append(learnt)
                    self.watches[learnt[0]].append(ci)
                    self.watches[learnt[1]].append(ci)
                    self._enqueue(learnt[0], ci)
                self.var_inc *= _VAR_DECAY
                if since_restart >= restart_limit:
                    since_restart = 0
                    restart_idx += 1
                    restart_limit = _RESTART_BASE * _luby(restart_idx)
                    self._cancel_until(0)
            else:
                lvl = len(self.trail_lim)
                if lvl < n_assumps:
                    p = internal_assumps[lvl]
                    val = self._lit_value(p)
                    if val == 1:
                        self.trail_lim.append(len(self.trail))
                    elif val == 0:
                        self._cancel_until(0)
                        return UNSAT
                    else:
                        self.trail_lim.append(len(self.trail))
                        self._enqueue(p, -1)
                else:
                    v = self._pick_branch()
                    if v < 0:
                        self.model = self.assigns[:]
                        self._cancel_until(0)
                        return SAT
                    self.trail_lim.append(len(self.trail))
                    self._enqueue((v << 1) | (self.phase[v] ^ 1), -1)

    def model_value(self, var):
        """Truth of an external variable in the last satisfying model."""
        return self.model[var] == 1
