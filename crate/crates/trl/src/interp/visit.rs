//! Bottom-up traversal and case dispatch.

use super::memo::partition_key;
use super::{AnalysisError, Analyzer};
use crate::ast::{Case, SiteId};
use crate::kind::ResKind;
use crate::matching::amatch;
use crate::shape::{children, reconstruct, Card, Kids, Shape, Unfolded};
use crate::state::{AbstractStore, Lattice, ResultSet, Results, Slot, StarSeq};

/// Continuations of a case sequence beyond this count are joined into one.
const MAX_CONTINUATIONS: usize = 16;

/// Success if either side rewrote something, fail if neither did.
fn vcombine(a: ResKind, b: ResKind) -> ResKind {
    if a == ResKind::Success || b == ResKind::Success {
        ResKind::Success
    } else {
        ResKind::Fail
    }
}

impl<'p> Analyzer<'p> {
    /// Traverse `vs` bottom-up. Success: some case fired somewhere. Fail: none did,
    /// and the value is the refined input. Error: a case body or reconstruction went wrong.
    pub(super) fn avisit(
        &mut self,
        site: SiteId,
        cases: &[Case],
        vs: &Shape,
        store: &AbstractStore,
    ) -> Result<ResultSet, AnalysisError> {
        if vs.is_bottom() {
            return Ok(ResultSet::empty());
        }
        let key = (site, partition_key(vs));
        let mut out = self.fixpoint(|t| &mut t.visit, key, (vs.clone(), store.clone()), &mut |me, (vs, store)| {
            me.visit_once(site, cases, vs, store)
        })?;
        // A failed traversal returns its subject unchanged, so the memo entry,
        // computed for a wider input of the same partition, can be cut back.
        if let Some(fail) = out.remove(ResKind::Fail) {
            match fail.value.map(|v| v.meet(vs)) {
                Some(v) if v.is_bottom() => {}
                v => out.add(ResKind::Fail, v, fail.store),
            }
        }
        Ok(out)
    }

    fn visit_once(
        &mut self,
        site: SiteId,
        cases: &[Case],
        vs: &Shape,
        store: &AbstractStore,
    ) -> Result<ResultSet, AnalysisError> {
        self.tick()?;
        let mut out = ResultSet::empty();
        for (part, kids) in children(vs, self.schema) {
            // Rebuilt values with the children's combined kind.
            let mut rebuilt = ResultSet::empty();
            match &kids {
                Kids::Seq(ks) => {
                    let r = self.visit_seq(site, cases, ks, store)?;
                    for (kind, entry) in r.iter() {
                        let Some(ks2) = entry.value.as_ref().filter(|_| kind != ResKind::Error) else {
                            rebuilt.add(ResKind::Error, None, entry.store.clone());
                            continue;
                        };
                        for u in reconstruct(&part, &Kids::Seq(ks2.clone()), self.schema) {
                            match u {
                                Unfolded::Success(v) => rebuilt.add(kind, Some(v), entry.store.clone()),
                                Unfolded::Error => rebuilt.add(ResKind::Error, None, entry.store.clone()),
                            }
                        }
                    }
                }
                Kids::Star(elem, card) => {
                    let r = self.visit_star(site, cases, elem, *card, store)?;
                    for (kind, entry) in r.iter() {
                        let Some(seq) = entry.value.as_ref().filter(|_| kind != ResKind::Error) else {
                            rebuilt.add(ResKind::Error, None, entry.store.clone());
                            continue;
                        };
                        // Rewritten elements may coincide, so a changed set can shrink down to one element.
                        let bound = match kind {
                            ResKind::Success => Card { lo: card.lo.min(1), hi: card.hi },
                            _ => *card,
                        };
                        let Some(c) = seq.card.meet(&bound) else { continue };
                        for u in reconstruct(&part, &Kids::Star(seq.elem.clone(), c), self.schema) {
                            match u {
                                Unfolded::Success(v) => rebuilt.add(kind, Some(v), entry.store.clone()),
                                Unfolded::Error => rebuilt.add(ResKind::Error, None, entry.store.clone()),
                            }
                        }
                    }
                }
            }
            for (kind, entry) in rebuilt.iter() {
                let Some(v) = entry.value.as_ref().filter(|_| kind != ResKind::Error) else {
                    out.add(ResKind::Error, None, entry.store.clone());
                    continue;
                };
                for (ck, ce) in self.aeval_cases(cases, v, &entry.store)?.iter() {
                    let k = match ck {
                        ResKind::Fail => vcombine(kind, ResKind::Fail),
                        other => other,
                    };
                    out.add(k, ce.value.clone(), ce.store.clone());
                }
            }
        }
        Ok(out)
    }

    /// Children of a constructor, left to right, threading the store.
    fn visit_seq(
        &mut self,
        site: SiteId,
        cases: &[Case],
        ks: &[Shape],
        store: &AbstractStore,
    ) -> Result<Results<Vec<Shape>>, AnalysisError> {
        let mut acc: Results<Vec<Shape>> = Results::single(ResKind::Fail, Some(Vec::new()), store.clone());
        for k in ks {
            let mut next = Results::empty();
            for (kind, entry) in acc.iter() {
                let Some(prefix) = entry.value.as_ref().filter(|_| kind != ResKind::Error) else {
                    next.add(ResKind::Error, None, entry.store.clone());
                    continue;
                };
                for (k2, e2) in self.avisit(site, cases, k, &entry.store)?.iter() {
                    match (k2, &e2.value) {
                        (ResKind::Error, _) | (_, None) => next.add(ResKind::Error, None, e2.store.clone()),
                        (_, Some(v)) => {
                            let mut vs = prefix.clone();
                            vs.push(v.clone());
                            next.add(vcombine(kind, k2), Some(vs), e2.store.clone());
                        }
                    }
                }
            }
            acc = next;
        }
        Ok(acc)
    }

    /// Elements of a set with `card` elements of shape `elem`, memoized breadth-wise.
    fn visit_star(
        &mut self,
        site: SiteId,
        cases: &[Case],
        elem: &Shape,
        card: Card,
        store: &AbstractStore,
    ) -> Result<Results<StarSeq>, AnalysisError> {
        let key = (site, partition_key(elem));
        self.fixpoint(
            |t| &mut t.star,
            key,
            ((elem.clone(), card), store.clone()),
            &mut |me, ((elem, card), store)| me.visit_star_once(site, cases, elem, *card, store),
        )
    }

    fn visit_star_once(
        &mut self,
        site: SiteId,
        cases: &[Case],
        elem: &Shape,
        card: Card,
        store: &AbstractStore,
    ) -> Result<Results<StarSeq>, AnalysisError> {
        self.tick()?;
        let mut out = Results::empty();
        if card.contains(0) {
            out.add(ResKind::Fail, Some(StarSeq::empty()), store.clone());
        }
        let Some(rest) = card.pred() else { return Ok(out) };
        if elem.is_bottom() {
            return Ok(out);
        }
        for (k1, e1) in self.avisit(site, cases, elem, store)?.iter() {
            let Some(v1) = e1.value.as_ref().filter(|_| k1 != ResKind::Error) else {
                out.add(ResKind::Error, None, e1.store.clone());
                continue;
            };
            for (k2, e2) in self.visit_star(site, cases, elem, rest, &e1.store)?.iter() {
                let Some(seq) = e2.value.as_ref().filter(|_| k2 != ResKind::Error) else {
                    out.add(ResKind::Error, None, e2.store.clone());
                    continue;
                };
                let combined = StarSeq {
                    elem: v1.join(&seq.elem),
                    card: seq.card.succ(),
                };
                out.add(vcombine(k1, k2), Some(combined), e2.store.clone());
            }
        }
        Ok(out)
    }

    /// Try the cases in order on `vs`; values that no case rewrites end up in the fail entry.
    pub(super) fn aeval_cases(
        &mut self,
        cases: &[Case],
        vs: &Shape,
        store: &AbstractStore,
    ) -> Result<ResultSet, AnalysisError> {
        let Some((case, rest)) = cases.split_first() else {
            return Ok(ResultSet::single(ResKind::Fail, Some(vs.clone()), store.clone()));
        };
        let mut out = ResultSet::empty();
        let mut continuations: Vec<(Shape, AbstractStore)> = Vec::new();
        for o in amatch(&case.pattern, vs, store, self.schema) {
            let Some(rho) = &o.binding else {
                continuations.push((o.value, o.store));
                continue;
            };
            let mut inner = o.store.clone();
            for (x, s) in rho {
                inner.set(x, Slot::assigned(s.clone()));
            }
            let r = self.aeval(&case.body, &inner)?;
            for (kind, entry) in r.iter() {
                if kind == ResKind::Fail {
                    continuations.push((o.value.clone(), o.store.clone()));
                    continue;
                }
                let mut st = entry.store.clone();
                for x in rho.keys() {
                    st.set(x, o.store.get(x));
                }
                out.add(kind, entry.value.clone(), st);
            }
        }
        let mut uniq: Vec<(Shape, AbstractStore)> = Vec::new();
        for c in continuations {
            if !uniq.contains(&c) {
                uniq.push(c);
            }
        }
        if uniq.len() > MAX_CONTINUATIONS {
            let joined = uniq
                .into_iter()
                .reduce(|(v1, s1), (v2, s2)| (v1.join(&v2), s1.join(&s2)))
                .expect("non-empty");
            uniq = vec![joined];
        }
        for (v, st) in uniq {
            out.absorb(self.aeval_cases(rest, &v, &st)?);
        }
        Ok(out)
    }
}
