use super::domain::Domain;
use super::VarId;

/// How [`CpConstraint::SumGreaterThan`] measures each scope variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SumMode {
    /// Each non-zero value contributes 1.
    CountNonZero,
    /// Each value contributes itself.
    Values,
}

/// Connectivity over an assembly graph whose vertices are environment
/// objects (always present) and free joints (present when their joint
/// variable or any incident edge variable is non-zero).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConnectivitySpec {
    /// One joint variable per joint.
    pub joints: Vec<VarId>,
    /// Environment object of each joint.
    pub envo_of: Vec<Option<usize>>,
    pub n_envos: usize,
    /// `(i, j, edge variable)` with zero-based joint indices.
    pub edges: Vec<(usize, usize, VarId)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CpConstraint {
    /// `var = value`; applied to the domain at registration.
    FixValue { var: VarId, value: u32 },
    /// If every guard is non-zero, the measured sum of `scope` must exceed `bound`.
    SumGreaterThan { scope: Vec<VarId>, bound: i64, mode: SumMode, guards: Vec<VarId> },
    /// `[some scope var != 0] => [indicator != 0]`, and the converse unless `one_way`.
    ConditionalEquivalence { indicator: VarId, scope: Vec<VarId>, one_way: bool },
    /// `[indicator = indicator_value] <=> [some scope var = scope_value]`.
    CountEquivalence { indicator: VarId, indicator_value: u32, scope: Vec<VarId>, scope_value: u32 },
    /// Global connectivity of the assembly graph.
    PathMatrixConnectivity(ConnectivitySpec),
    /// `[target != 0] <=> [some pair (p, q) has p != 0 and q != 0]`; the
    /// recurrence of the literal path-matrix encoding.
    PathLink { target: VarId, via: Vec<(VarId, VarId)> },
}

/// Pre-digested connectivity data used during propagation.
#[derive(Debug, Clone)]
pub(crate) struct Connectivity {
    spec: ConnectivitySpec,
    /// Edge positions incident to each joint.
    incident: Vec<Vec<usize>>,
}

#[derive(Debug, Clone)]
pub(crate) enum Compiled {
    Sum { scope: Vec<VarId>, bound: i64, mode: SumMode, guards: Vec<VarId> },
    CondEq { indicator: VarId, scope: Vec<VarId>, one_way: bool },
    CountEq { indicator: VarId, g: u32, scope: Vec<VarId>, h: u32 },
    Connectivity(Box<Connectivity>),
    PathLink { target: VarId, via: Vec<(VarId, VarId)> },
}

pub(crate) struct Wipeout;

/// Narrows `doms[var]` to `to`, recording the change.
#[inline]
fn narrow(doms: &mut [Domain], var: VarId, to: Domain, changed: &mut Vec<VarId>) -> Result<(), Wipeout> {
    let cur = doms[var.0];
    let next = cur.intersect(to);
    if next.is_empty() {
        return Err(Wipeout);
    }
    if next != cur {
        doms[var.0] = next;
        changed.push(var);
    }
    Ok(())
}

fn find(parent: &mut [usize], mut v: usize) -> usize {
    while parent[v] != v {
        parent[v] = parent[parent[v]];
        v = parent[v];
    }
    v
}

fn union(parent: &mut [usize], a: usize, b: usize) {
    let (ra, rb) = (find(parent, a), find(parent, b));
    if ra != rb {
        parent[ra.max(rb)] = ra.min(rb);
    }
}

impl Connectivity {
    pub(crate) fn new(spec: ConnectivitySpec) -> Self {
        let mut incident = vec![Vec::new(); spec.joints.len()];
        for (k, &(i, j, _)) in spec.edges.iter().enumerate() {
            incident[i].push(k);
            incident[j].push(k);
        }
        Self { spec, incident }
    }

    fn vertex(&self, joint: usize) -> usize {
        self.spec.envo_of[joint].unwrap_or(self.spec.n_envos + joint)
    }

    fn n_vertices(&self) -> usize {
        self.spec.n_envos + self.spec.joints.len()
    }

    fn filter(&self, doms: &mut [Domain], changed: &mut Vec<VarId>) -> Result<(), Wipeout> {
        let sp = &self.spec;
        let mut parent: Vec<usize> = (0..self.n_vertices()).collect();
        for &(i, j, e) in &sp.edges {
            if doms[e.0].can_be_nonzero() {
                union(&mut parent, self.vertex(i), self.vertex(j));
            }
        }
        let mut required_root = None;
        let mut require = |parent: &mut Vec<usize>, v: usize| -> Result<(), Wipeout> {
            let r = find(parent, v);
            match required_root {
                None => required_root = Some(r),
                Some(root) if root != r => return Err(Wipeout),
                _ => {}
            }
            Ok(())
        };
        for e in 0..sp.n_envos {
            require(&mut parent, e)?;
        }
        for joint in 0..sp.joints.len() {
            if sp.envo_of[joint].is_some() {
                continue;
            }
            let certain = !doms[sp.joints[joint].0].can_be_zero()
                || self.incident[joint].iter().any(|&k| !doms[sp.edges[k].2 .0].can_be_zero());
            if certain {
                require(&mut parent, sp.n_envos + joint)?;
            }
        }
        // Free joints outside the component of the required vertices can never be present.
        if let Some(root) = required_root {
            for joint in 0..sp.joints.len() {
                if sp.envo_of[joint].is_some() || find(&mut parent, sp.n_envos + joint) == root {
                    continue;
                }
                narrow(doms, sp.joints[joint], Domain::singleton(0), changed)?;
                for &k in &self.incident[joint] {
                    narrow(doms, sp.edges[k].2, Domain::singleton(0), changed)?;
                }
            }
        }
        Ok(())
    }

    fn check(&self, values: &[u32]) -> bool {
        let sp = &self.spec;
        let n_vertices = self.n_vertices();
        let mut parent: Vec<usize> = (0..n_vertices).collect();
        let mut present = vec![false; n_vertices];
        present[..sp.n_envos].fill(true);
        for &(i, j, e) in &sp.edges {
            if values[e.0] != 0 {
                let (a, b) = (self.vertex(i), self.vertex(j));
                union(&mut parent, a, b);
                present[a] = true;
                present[b] = true;
            }
        }
        for (joint, &var) in sp.joints.iter().enumerate() {
            if sp.envo_of[joint].is_none() && values[var.0] != 0 {
                present[sp.n_envos + joint] = true;
            }
        }
        let mut root = None;
        for v in 0..n_vertices {
            if present[v] {
                let r = find(&mut parent, v);
                if *root.get_or_insert(r) != r {
                    return false;
                }
            }
        }
        true
    }

    pub(crate) fn vars(&self) -> Vec<VarId> {
        let mut out = self.spec.joints.clone();
        out.extend(self.spec.edges.iter().map(|e| e.2));
        out
    }
}

impl Compiled {
    pub(crate) fn vars(&self) -> Vec<VarId> {
        match self {
            Compiled::Sum { scope, guards, .. } => scope.iter().chain(guards).copied().collect(),
            Compiled::CondEq { indicator, scope, .. } | Compiled::CountEq { indicator, scope, .. } => {
                std::iter::once(*indicator).chain(scope.iter().copied()).collect()
            }
            Compiled::Connectivity(c) => c.vars(),
            Compiled::PathLink { target, via } => {
                std::iter::once(*target).chain(via.iter().flat_map(|&(p, q)| [p, q])).collect()
            }
        }
    }

    /// Removes unsupported values; `Err` on a domain wipeout.
    pub(crate) fn filter(&self, doms: &mut [Domain], changed: &mut Vec<VarId>) -> Result<(), Wipeout> {
        match self {
            Compiled::Sum { scope, bound, mode, guards } => {
                if !guards.iter().all(|g| doms[g.0].can_be_nonzero()) {
                    return Ok(());
                }
                let contribution = |v: u32| -> i64 {
                    match mode {
                        SumMode::CountNonZero => i64::from(v != 0),
                        SumMode::Values => i64::from(v),
                    }
                };
                let best = |d: Domain| d.values().map(contribution).max().unwrap_or(0);
                let total: i64 = scope.iter().map(|s| best(doms[s.0])).sum();
                let guards_certain = guards.iter().all(|g| !doms[g.0].can_be_zero());
                if guards_certain {
                    if total <= *bound {
                        return Err(Wipeout);
                    }
                    for &s in scope {
                        let others = total - best(doms[s.0]);
                        let keep = doms[s.0].filter(|v| others + contribution(v) > *bound);
                        narrow(doms, s, keep, changed)?;
                    }
                } else if total <= *bound {
                    let mut open = guards.iter().filter(|g| doms[g.0].can_be_zero());
                    if let (Some(&only), None) = (open.next(), open.next()) {
                        narrow(doms, only, Domain::singleton(0), changed)?;
                    }
                }
                Ok(())
            }
            Compiled::CondEq { indicator, scope, one_way } => {
                if scope.iter().any(|s| !doms[s.0].can_be_zero()) {
                    narrow(doms, *indicator, doms[indicator.0].nonzero(), changed)?;
                }
                if !doms[indicator.0].can_be_nonzero() {
                    for &s in scope {
                        narrow(doms, s, Domain::singleton(0), changed)?;
                    }
                }
                if !one_way {
                    let mut possible = scope.iter().filter(|s| doms[s.0].can_be_nonzero());
                    match (possible.next().copied(), possible.next()) {
                        (None, _) => narrow(doms, *indicator, Domain::singleton(0), changed)?,
                        (Some(only), None) if !doms[indicator.0].can_be_zero() => {
                            narrow(doms, only, doms[only.0].nonzero(), changed)?
                        }
                        _ => {}
                    }
                }
                Ok(())
            }
            Compiled::CountEq { indicator, g, scope, h } => {
                let (g, h) = (*g, *h);
                if scope.iter().any(|s| doms[s.0] == Domain::singleton(h)) {
                    narrow(doms, *indicator, Domain::singleton(g), changed)?;
                }
                if !scope.iter().any(|s| doms[s.0].contains(h)) {
                    narrow(doms, *indicator, doms[indicator.0].without(g), changed)?;
                }
                if !doms[indicator.0].contains(g) {
                    for &s in scope {
                        narrow(doms, s, doms[s.0].without(h), changed)?;
                    }
                }
                if doms[indicator.0] == Domain::singleton(g) {
                    let mut possible = scope.iter().filter(|s| doms[s.0].contains(h));
                    match (possible.next().copied(), possible.next()) {
                        (None, _) => return Err(Wipeout),
                        (Some(only), None) => narrow(doms, only, Domain::singleton(h), changed)?,
                        _ => {}
                    }
                }
                Ok(())
            }
            Compiled::Connectivity(c) => c.filter(doms, changed),
            Compiled::PathLink { target, via } => {
                let certain = |d: Domain| !d.can_be_zero();
                if via.iter().any(|&(p, q)| certain(doms[p.0]) && certain(doms[q.0])) {
                    narrow(doms, *target, doms[target.0].nonzero(), changed)?;
                }
                let possible: Vec<(VarId, VarId)> = via
                    .iter()
                    .copied()
                    .filter(|&(p, q)| doms[p.0].can_be_nonzero() && doms[q.0].can_be_nonzero())
                    .collect();
                if possible.is_empty() {
                    narrow(doms, *target, Domain::singleton(0), changed)?;
                }
                if !doms[target.0].can_be_nonzero() {
                    for &(p, q) in via {
                        if certain(doms[p.0]) {
                            narrow(doms, q, Domain::singleton(0), changed)?;
                        }
                        if certain(doms[q.0]) {
                            narrow(doms, p, Domain::singleton(0), changed)?;
                        }
                    }
                } else if !doms[target.0].can_be_zero() && possible.len() == 1 {
                    let (p, q) = possible[0];
                    narrow(doms, p, doms[p.0].nonzero(), changed)?;
                    narrow(doms, q, doms[q.0].nonzero(), changed)?;
                }
                Ok(())
            }
        }
    }

    /// Full check on a complete assignment.
    pub(crate) fn check(&self, values: &[u32]) -> bool {
        match self {
            Compiled::Sum { scope, bound, mode, guards } => {
                if guards.iter().any(|g| values[g.0] == 0) {
                    return true;
                }
                let sum: i64 = scope
                    .iter()
                    .map(|s| match mode {
                        SumMode::CountNonZero => i64::from(values[s.0] != 0),
                        SumMode::Values => i64::from(values[s.0]),
                    })
                    .sum();
                sum > *bound
            }
            Compiled::CondEq { indicator, scope, one_way } => {
                let any = scope.iter().any(|s| values[s.0] != 0);
                let ind = values[indicator.0] != 0;
                if *one_way {
                    !any || ind
                } else {
                    any == ind
                }
            }
            Compiled::CountEq { indicator, g, scope, h } => {
                (values[indicator.0] == *g) == scope.iter().any(|s| values[s.0] == *h)
            }
            Compiled::Connectivity(c) => c.check(values),
            Compiled::PathLink { target, via } => {
                (values[target.0] != 0) == via.iter().any(|&(p, q)| values[p.0] != 0 && values[q.0] != 0)
            }
        }
    }
}
