//! Per-algebra memo of the expensive derived objects: the congruence
//! lattice, `M`, `M*`, commutators and term tables.

use std::cell::{OnceCell, RefCell};
use std::collections::HashMap;
use std::rc::Rc;

use crate::algebra::FiniteAlgebra;
use crate::commutator::{
    hypercommutator_from_mstar, tc_commutator_from_m, zero_test_witness, CommutatorTrace,
};
use crate::congruence::{con_lattice, ConLattice, Congruence};
use crate::error::Result;
use crate::limits::Limits;
use crate::special::{difference_verdict, kiss_verdict, TermVerdict};
use crate::term::{tabulate, Term, TermTable};
use crate::two_dim::{m_rel, mstar_from_m, r_rel, MstarStages, TupleSet4};

type PairKey = (Congruence, Congruence);

pub struct Context {
    algebra: FiniteAlgebra,
    limits: Limits,
    lattice: OnceCell<ConLattice>,
    m: RefCell<HashMap<PairKey, Rc<TupleSet4>>>,
    mstar: RefCell<HashMap<PairKey, Rc<MstarStages>>>,
    commutators: RefCell<HashMap<PairKey, Rc<CommutatorTrace>>>,
    hyper: RefCell<HashMap<PairKey, Congruence>>,
    tables: RefCell<HashMap<(Term, usize), Rc<TermTable>>>,
    verdicts: RefCell<HashMap<(Term, usize), Rc<TermVerdict>>>,
}

impl Context {
    pub fn new(algebra: FiniteAlgebra, limits: Limits) -> Self {
        Context {
            algebra,
            limits,
            lattice: OnceCell::new(),
            m: RefCell::default(),
            mstar: RefCell::default(),
            commutators: RefCell::default(),
            hyper: RefCell::default(),
            tables: RefCell::default(),
            verdicts: RefCell::default(),
        }
    }

    pub fn algebra(&self) -> &FiniteAlgebra {
        &self.algebra
    }

    pub fn limits(&self) -> &Limits {
        &self.limits
    }

    pub fn size(&self) -> usize {
        self.algebra.size()
    }

    pub fn lattice(&self) -> Result<&ConLattice> {
        if let Some(l) = self.lattice.get() {
            return Ok(l);
        }
        let l = con_lattice(&self.algebra, self.limits.max_lattice_size)?;
        Ok(self.lattice.get_or_init(|| l))
    }

    pub fn congruences(&self) -> Result<&[Congruence]> {
        Ok(&self.lattice()?.congruences)
    }

    /// All ordered pairs of congruences, in lattice order.
    pub fn congruence_pairs(&self) -> Result<Vec<(Congruence, Congruence)>> {
        let cons = self.congruences()?;
        Ok(cons
            .iter()
            .flat_map(|a| cons.iter().map(move |b| (a.clone(), b.clone())))
            .collect())
    }

    pub fn r(&self, alpha: &Congruence, beta: &Congruence) -> TupleSet4 {
        r_rel(alpha, beta)
    }

    pub fn m(&self, alpha: &Congruence, beta: &Congruence) -> Result<Rc<TupleSet4>> {
        let key = (alpha.clone(), beta.clone());
        if let Some(m) = self.m.borrow().get(&key) {
            return Ok(m.clone());
        }
        let m = Rc::new(m_rel(&self.algebra, alpha, beta, self.limits.max_power)?);
        self.m.borrow_mut().insert(key, m.clone());
        Ok(m)
    }

    pub fn mstar_stages(&self, alpha: &Congruence, beta: &Congruence) -> Result<Rc<MstarStages>> {
        let key = (alpha.clone(), beta.clone());
        if let Some(s) = self.mstar.borrow().get(&key) {
            return Ok(s.clone());
        }
        let m = self.m(alpha, beta)?;
        let s = Rc::new(mstar_from_m((*m).clone()));
        self.mstar.borrow_mut().insert(key, s.clone());
        Ok(s)
    }

    pub fn mstar(&self, alpha: &Congruence, beta: &Congruence) -> Result<TupleSet4> {
        Ok(self.mstar_stages(alpha, beta)?.fixpoint.clone())
    }

    pub fn trace(&self, alpha: &Congruence, beta: &Congruence) -> Result<Rc<CommutatorTrace>> {
        let key = (alpha.clone(), beta.clone());
        if let Some(t) = self.commutators.borrow().get(&key) {
            return Ok(t.clone());
        }
        let m = self.m(alpha, beta)?;
        let t = Rc::new(tc_commutator_from_m(&self.algebra, alpha, beta, &m)?);
        self.commutators.borrow_mut().insert(key, t.clone());
        Ok(t)
    }

    pub fn commutator(&self, alpha: &Congruence, beta: &Congruence) -> Result<Congruence> {
        Ok(self.trace(alpha, beta)?.result.clone())
    }

    /// Direct zero test on `M(α,β)`, independent of the δ iteration.
    pub fn commutator_is_zero(&self, alpha: &Congruence, beta: &Congruence) -> Result<bool> {
        Ok(zero_test_witness(&*self.m(alpha, beta)?).is_none())
    }

    pub fn hypercommutator(&self, alpha: &Congruence, beta: &Congruence) -> Result<Congruence> {
        let key = (alpha.clone(), beta.clone());
        if let Some(h) = self.hyper.borrow().get(&key) {
            return Ok(h.clone());
        }
        let ms = self.mstar_stages(alpha, beta)?;
        let h = hypercommutator_from_mstar(&self.algebra, alpha, beta, &ms.fixpoint)?.result;
        self.hyper.borrow_mut().insert(key, h.clone());
        Ok(h)
    }

    pub fn table(&self, t: &Term, nvars: usize) -> Result<Rc<TermTable>> {
        let key = (t.clone(), nvars);
        if let Some(tab) = self.tables.borrow().get(&key) {
            return Ok(tab.clone());
        }
        let tab = Rc::new(tabulate(&self.algebra, t, nvars)?);
        self.tables.borrow_mut().insert(key, tab.clone());
        Ok(tab)
    }

    fn verdict(&self, t: &Term, arity: usize) -> Result<Rc<TermVerdict>> {
        let key = (t.clone(), arity);
        if let Some(v) = self.verdicts.borrow().get(&key) {
            return Ok(v.clone());
        }
        let v = Rc::new(match arity {
            3 => difference_verdict(self, t)?,
            _ => kiss_verdict(self, t)?,
        });
        self.verdicts.borrow_mut().insert(key, v.clone());
        Ok(v)
    }

    /// Memoized [`difference_verdict`].
    pub fn difference_term(&self, p: &Term) -> Result<Rc<TermVerdict>> {
        self.verdict(p, 3)
    }

    /// Memoized [`kiss_verdict`].
    pub fn kiss_term(&self, q: &Term) -> Result<Rc<TermVerdict>> {
        self.verdict(q, 4)
    }
}
