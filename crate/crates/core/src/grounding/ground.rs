//! Naive typed grounding of a [`LiftedTask`].

use std::collections::{HashMap, HashSet};

use crate::bitset::Bitset;
use crate::error::{Error, Result};
use crate::grounding::pddl::{ActionSchema, GroundAtom, LiftedTask, Literal, Term};
use crate::strips::{AtomId, GroundAction, GroundTask, LoadReport};

pub const DEFAULT_GROUNDING_CAP: usize = 200_000;

#[derive(Debug, Clone, Copy)]
pub struct GroundingLimits {
    pub max_atoms: usize,
    pub max_actions: usize,
}

impl Default for GroundingLimits {
    fn default() -> Self {
        Self {
            max_atoms: DEFAULT_GROUNDING_CAP,
            max_actions: DEFAULT_GROUNDING_CAP,
        }
    }
}

#[derive(Default)]
struct AtomTable {
    names: Vec<String>,
    ids: HashMap<GroundAtom, AtomId>,
}

impl AtomTable {
    fn intern(&mut self, atom: GroundAtom, cap: usize) -> Result<AtomId> {
        if let Some(&id) = self.ids.get(&atom) {
            return Ok(id);
        }
        let id = self.names.len();
        if id + 1 > cap {
            return Err(Error::GroundingSize {
                what: "atoms",
                count: id + 1,
                cap,
            });
        }
        self.names.push(atom.name());
        self.ids.insert(atom, id);
        Ok(id)
    }
}

struct PendingAction {
    name: String,
    pre: Vec<AtomId>,
    add: Vec<AtomId>,
    del: Vec<AtomId>,
}

fn instantiate(lit: &Literal, binding: &HashMap<&str, &str>) -> GroundAtom {
    GroundAtom {
        predicate: lit.predicate.clone(),
        args: lit
            .terms
            .iter()
            .map(|t| match t {
                Term::Var(v) => binding[v.as_str()].to_string(),
                Term::Const(c) => c.clone(),
            })
            .collect(),
    }
}

fn bound_after(lit: &Literal, schema: &ActionSchema) -> usize {
    lit.terms
        .iter()
        .filter_map(|t| match t {
            Term::Var(v) => schema.params.iter().position(|p| &p.name == v),
            Term::Const(_) => None,
        })
        .max()
        .map_or(0, |i| i + 1)
}

struct SchemaGrounder<'a> {
    schema: &'a ActionSchema,
    domains: Vec<Vec<&'a str>>,
    /// Static precondition literals indexed by the parameter depth at which
    /// all their variables are bound.
    static_checks: Vec<Vec<&'a Literal>>,
    init: &'a HashSet<GroundAtom>,
}

impl<'a> SchemaGrounder<'a> {
    fn enumerate(&self, depth: usize, binding: &mut Vec<&'a str>, out: &mut Vec<Vec<String>>, cap: usize, total: &mut usize) -> Result<()> {
        let map: HashMap<&str, &str>;
        if !self.static_checks[depth].is_empty() {
            map = self
                .schema
                .params
                .iter()
                .zip(binding.iter())
                .map(|(p, o)| (p.name.as_str(), *o))
                .collect();
            for lit in &self.static_checks[depth] {
                if !self.init.contains(&instantiate(lit, &map)) {
                    return Ok(());
                }
            }
        }
        if depth == self.domains.len() {
            *total += 1;
            if *total > cap {
                return Err(Error::GroundingSize {
                    what: "actions",
                    count: *total,
                    cap,
                });
            }
            out.push(binding.iter().map(|s| s.to_string()).collect());
            return Ok(());
        }
        for obj in &self.domains[depth] {
            binding.push(obj);
            self.enumerate(depth + 1, binding, out, cap, total)?;
            binding.pop();
        }
        Ok(())
    }
}

/// Grounds every schema instantiation over type-compatible objects. Atoms of
/// static predicates (never in any effect) are checked against the initial
/// state and dropped; ids follow first appearance across schemas, then init,
/// then goal.
pub fn ground(lifted: &LiftedTask) -> Result<(GroundTask, LoadReport)> {
    ground_with_limits(lifted, GroundingLimits::default())
}

pub fn ground_with_limits(
    lifted: &LiftedTask,
    limits: GroundingLimits,
) -> Result<(GroundTask, LoadReport)> {
    let fluent: HashSet<&str> = lifted
        .schemas
        .iter()
        .flat_map(|s| s.add.iter().chain(&s.del))
        .map(|l| l.predicate.as_str())
        .collect();
    let is_static = |p: &str| !fluent.contains(p);
    let init_set: HashSet<GroundAtom> = lifted.init.iter().cloned().collect();

    let mut atoms = AtomTable::default();
    let mut pending = Vec::new();
    let mut total_actions = 0usize;

    for schema in &lifted.schemas {
        let domains: Vec<Vec<&str>> = schema
            .params
            .iter()
            .map(|p| {
                lifted
                    .objects
                    .iter()
                    .filter(|o| lifted.is_subtype(&o.ty, &p.ty))
                    .map(|o| o.name.as_str())
                    .collect()
            })
            .collect();
        let mut static_checks = vec![Vec::new(); schema.params.len() + 1];
        for lit in schema.pre.iter().filter(|l| is_static(&l.predicate)) {
            static_checks[bound_after(lit, schema)].push(lit);
        }
        let grounder = SchemaGrounder {
            schema,
            domains,
            static_checks,
            init: &init_set,
        };
        let mut bindings = Vec::new();
        grounder.enumerate(0, &mut Vec::new(), &mut bindings, limits.max_actions, &mut total_actions)?;

        for args in bindings {
            let map: HashMap<&str, &str> = schema
                .params
                .iter()
                .zip(&args)
                .map(|(p, o)| (p.name.as_str(), o.as_str()))
                .collect();
            let mut intern_all = |lits: &[Literal], skip_static: bool| -> Result<Vec<AtomId>> {
                lits.iter()
                    .filter(|l| !(skip_static && is_static(&l.predicate)))
                    .map(|l| atoms.intern(instantiate(l, &map), limits.max_atoms))
                    .collect()
            };
            let pre = intern_all(&schema.pre, true)?;
            let add = intern_all(&schema.add, false)?;
            let del = intern_all(&schema.del, false)?;
            let name = if args.is_empty() {
                schema.name.clone()
            } else {
                format!("{}({})", schema.name, args.join(","))
            };
            pending.push(PendingAction { name, pre, add, del });
        }
    }

    let mut init_ids = Vec::new();
    for atom in &lifted.init {
        if !is_static(&atom.predicate) {
            init_ids.push(atoms.intern(atom.clone(), limits.max_atoms)?);
        }
    }
    let mut goal_ids = Vec::new();
    for atom in &lifted.goal {
        if is_static(&atom.predicate) && init_set.contains(atom) {
            continue;
        }
        goal_ids.push(atoms.intern(atom.clone(), limits.max_atoms)?);
    }

    let n = atoms.names.len();
    let actions = pending
        .into_iter()
        .map(|p| GroundAction::new(p.name, n, p.pre, p.add, p.del))
        .collect();
    GroundTask::new(
        atoms.names,
        actions,
        Bitset::from_ids(n, init_ids),
        Bitset::from_ids(n, goal_ids),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grounding::pddl::parse_pddl;

    const DOMAIN: &str = "(define (domain links) (:requirements :strips :typing)
        (:types node)
        (:predicates (at ?n - node) (link ?a ?b - node) (visited ?n - node))
        (:action go :parameters (?a ?b - node)
           :precondition (and (at ?a) (link ?a ?b))
           :effect (and (at ?b) (visited ?b) (not (at ?a))))
        (:action never :parameters (?a - node)
           :precondition (and (link ?a ?a))
           :effect (visited ?a)))";

    const PROBLEM: &str = "(define (problem p) (:domain links)
        (:objects n1 n2 n3 - node)
        (:init (at n1) (link n1 n2) (link n2 n3))
        (:goal (and (visited n3))))";

    #[test]
    fn static_preconditions_prune_instances() {
        let lifted = parse_pddl(DOMAIN, PROBLEM).unwrap();
        let (task, _) = ground(&lifted).unwrap();
        let names: Vec<&str> = task.actions().iter().map(|a| a.name.as_str()).collect();
        assert_eq!(names, vec!["go(n1,n2)", "go(n2,n3)"]);
        // `link` is static so it never becomes an atom.
        assert_eq!(
            task.atoms(),
            &["at(n1)", "at(n2)", "visited(n2)", "at(n3)", "visited(n3)"]
        );
        assert_eq!(task.describe(task.init()), vec!["at(n1)"]);
    }

    #[test]
    fn grounding_is_deterministic() {
        let lifted = parse_pddl(DOMAIN, PROBLEM).unwrap();
        assert_eq!(ground(&lifted).unwrap().0, ground(&lifted).unwrap().0);
    }

    #[test]
    fn caps_are_enforced() {
        let lifted = parse_pddl(DOMAIN, PROBLEM).unwrap();
        let tight = GroundingLimits { max_atoms: 2, max_actions: 100 };
        assert!(matches!(
            ground_with_limits(&lifted, tight),
            Err(Error::GroundingSize { what: "atoms", .. })
        ));
        let tight = GroundingLimits { max_atoms: 100, max_actions: 1 };
        assert!(matches!(
            ground_with_limits(&lifted, tight),
            Err(Error::GroundingSize { what: "actions", .. })
        ));
    }
}
