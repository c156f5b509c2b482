//! Private simultaneous message protocols.
//!
//! Two constructions are provided: a two-party one-time table and an n-party
//! protocol obtained by randomizing a permutation branching program. Both are
//! checked against the correctness and privacy clauses by [`psm_verify`] and
//! can then be wrapped as a hypothesis-testing scheme by [`psm_to_sdht`].

use std::collections::{BTreeMap, HashMap};

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::engine::{ceil_log2, EvaluationReport, Method};
use crate::error::{Result, SdhtError};
use crate::prob::{FiniteDistribution, ENUMERATION_BUDGET};
use crate::rng::stream_rng;

/// Permutation in one-line notation: `i ↦ self.0[i]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Perm(pub Vec<u8>);

impl Perm {
    pub fn identity(points: usize) -> Self {
        Perm((0..points as u8).collect())
    }

    pub fn points(&self) -> usize {
        self.0.len()
    }

    /// `self` followed by `other`: `i ↦ other(self(i))`.
    pub fn then(&self, other: &Perm) -> Perm {
        Perm(self.0.iter().map(|&i| other.0[i as usize]).collect())
    }

    pub fn inverse(&self) -> Perm {
        let mut inv = vec![0u8; self.0.len()];
        for (i, &j) in self.0.iter().enumerate() {
            inv[j as usize] = i as u8;
        }
        Perm(inv)
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &j)| i == j as usize)
    }

    pub fn is_valid(&self) -> bool {
        let mut seen = vec![false; self.0.len()];
        for &j in &self.0 {
            if j as usize >= seen.len() || seen[j as usize] {
                return false;
            }
            seen[j as usize] = true;
        }
        true
    }

    /// True if the permutation is a single cycle through every point.
    pub fn is_full_cycle(&self) -> bool {
        let k = self.0.len();
        let mut i = 0usize;
        for step in 1..=k {
            i = self.0[i] as usize;
            if i == 0 {
                return step == k;
            }
        }
        false
    }

    /// `ρ⁻¹ · self · ρ`.
    pub fn conjugate_by(&self, rho: &Perm) -> Perm {
        rho.inverse().then(self).then(rho)
    }

    /// Position in lexicographic order of all permutations of the same size.
    pub fn rank(&self) -> u64 {
        let k = self.0.len();
        let mut rest: Vec<u8> = (0..k as u8).collect();
        let mut r = 0u64;
        for (pos, &v) in self.0.iter().enumerate() {
            let idx = rest.iter().position(|&x| x == v).expect("valid permutation");
            r += idx as u64 * factorial(k - 1 - pos);
            rest.remove(idx);
        }
        r
    }

    pub fn unrank(points: usize, mut r: u64) -> Perm {
        let mut rest: Vec<u8> = (0..points as u8).collect();
        let mut out = Vec::with_capacity(points);
        for pos in 0..points {
            let f = factorial(points - 1 - pos);
            let idx = (r / f) as usize;
            r %= f;
            out.push(rest.remove(idx));
        }
        Perm(out)
    }
}

fn factorial(k: usize) -> u64 {
    (1..=k as u64).product()
}

/// Finite permutation group used by a branching program.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Group {
    /// All permutations of `degree` points (degree ≤ 5).
    Symmetric { degree: usize },
    /// Rotations of `order` points.
    Cyclic { order: usize },
}

impl Group {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Group::Symmetric { degree } if (1..=5).contains(&degree) => Ok(()),
            Group::Cyclic { order } if (2..=255).contains(&order) => Ok(()),
            g => Err(SdhtError::InvalidArgument(format!("unsupported group {g:?}"))),
        }
    }

    pub fn points(&self) -> usize {
        match *self {
            Group::Symmetric { degree } => degree,
            Group::Cyclic { order } => order,
        }
    }

    pub fn order(&self) -> u64 {
        match *self {
            Group::Symmetric { degree } => factorial(degree),
            Group::Cyclic { order } => order as u64,
        }
    }

    pub fn identity(&self) -> Perm {
        Perm::identity(self.points())
    }

    pub fn rotation(order: usize, r: usize) -> Perm {
        Perm((0..order).map(|i| ((i + r) % order) as u8).collect())
    }

    pub fn element(&self, index: u64) -> Perm {
        match *self {
            Group::Symmetric { degree } => Perm::unrank(degree, index),
            Group::Cyclic { order } => Self::rotation(order, index as usize),
        }
    }

    pub fn index_of(&self, p: &Perm) -> u64 {
        match self {
            Group::Symmetric { .. } => p.rank(),
            Group::Cyclic { .. } => p.0[0] as u64,
        }
    }

    pub fn contains(&self, p: &Perm) -> bool {
        p.points() == self.points()
            && p.is_valid()
            && match *self {
                Group::Symmetric { .. } => true,
                Group::Cyclic { order } => *p == Self::rotation(order, p.0[0] as usize),
            }
    }

    pub fn random<R: Rng>(&self, rng: &mut R) -> Perm {
        match *self {
            Group::Symmetric { degree } => {
                let mut v: Vec<u8> = (0..degree as u8).collect();
                v.shuffle(rng);
                Perm(v)
            }
            Group::Cyclic { order } => Self::rotation(order, rng.gen_range(0..order)),
        }
    }

    fn element_bits(&self) -> u64 {
        ceil_log2(self.order() as usize)
    }
}

/// Boolean formula over input bits; `Leaf` reads bit `bit` of client `client`'s value.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum BooleanFormula {
    Leaf { client: usize, bit: usize },
    Not { arg: Box<BooleanFormula> },
    And { left: Box<BooleanFormula>, right: Box<BooleanFormula> },
    Or { left: Box<BooleanFormula>, right: Box<BooleanFormula> },
}

impl BooleanFormula {
    pub fn leaf(client: usize, bit: usize) -> Self {
        BooleanFormula::Leaf { client, bit }
    }

    pub fn not(a: Self) -> Self {
        BooleanFormula::Not { arg: Box::new(a) }
    }

    pub fn and(a: Self, b: Self) -> Self {
        BooleanFormula::And { left: Box::new(a), right: Box::new(b) }
    }

    pub fn or(a: Self, b: Self) -> Self {
        BooleanFormula::Or { left: Box::new(a), right: Box::new(b) }
    }

    /// Majority of three one-bit clients: (x0 ∧ x1) ∨ (x2 ∧ (x0 ∨ x1)).
    pub fn majority3() -> Self {
        let x = |i| Self::leaf(i, 0);
        Self::or(Self::and(x(0), x(1)), Self::and(x(2), Self::or(x(0), x(1))))
    }

    /// Formula for a table over bit-encoded clients, as an OR of minterms
    /// balanced into a tree. The table must be over power-of-two domains.
    pub fn from_table(table: &TruthTable) -> Result<Self> {
        let bits: Vec<usize> = table
            .sizes
            .iter()
            .map(|&s| {
                if s.is_power_of_two() {
                    Ok(s.trailing_zeros() as usize)
                } else {
                    Err(SdhtError::InvalidArgument(format!("domain size {s} is not a power of two; bit-encode first")))
                }
            })
            .collect::<Result<_>>()?;
        let literal = |client: usize, bit: usize, set: bool| {
            let l = Self::leaf(client, bit);
            if set {
                l
            } else {
                Self::not(l)
            }
        };
        let minterms: Vec<Self> = all_inputs(&table.sizes)
            .into_iter()
            .filter(|x| table.get(x) == 1)
            .map(|x| {
                let lits = (0..x.len())
                    .flat_map(|c| (0..bits[c]).map(move |b| (c, b)))
                    .map(|(c, b)| literal(c, b, (x[c] >> b) & 1 == 1))
                    .collect();
                balanced(lits, Self::and)
            })
            .collect();
        if minterms.is_empty() {
            // Constant false: x ∧ ¬x on the first bit.
            let first = table.sizes.iter().position(|&s| s > 1).unwrap_or(0);
            return Ok(Self::and(Self::leaf(first, 0), Self::not(Self::leaf(first, 0))));
        }
        Ok(balanced(minterms, Self::or))
    }

    pub fn eval(&self, inputs: &[usize]) -> bool {
        match self {
            BooleanFormula::Leaf { client, bit } => (inputs[*client] >> bit) & 1 == 1,
            BooleanFormula::Not { arg } => !arg.eval(inputs),
            BooleanFormula::And { left, right } => left.eval(inputs) && right.eval(inputs),
            BooleanFormula::Or { left, right } => left.eval(inputs) || right.eval(inputs),
        }
    }

    /// Gate nesting depth; a leaf has depth 0.
    pub fn depth(&self) -> usize {
        match self {
            BooleanFormula::Leaf { .. } => 0,
            BooleanFormula::Not { arg } => 1 + arg.depth(),
            BooleanFormula::And { left, right } | BooleanFormula::Or { left, right } => {
                1 + left.depth().max(right.depth())
            }
        }
    }

    /// Bits used per client (highest referenced bit + 1).
    pub fn bits_per_client(&self) -> Vec<usize> {
        let mut out = Vec::new();
        self.collect_bits(&mut out);
        out
    }

    fn collect_bits(&self, out: &mut Vec<usize>) {
        match self {
            BooleanFormula::Leaf { client, bit } => {
                if out.len() <= *client {
                    out.resize(client + 1, 0);
                }
                out[*client] = out[*client].max(bit + 1);
            }
            BooleanFormula::Not { arg } => arg.collect_bits(out),
            BooleanFormula::And { left, right } | BooleanFormula::Or { left, right } => {
                left.collect_bits(out);
                right.collect_bits(out);
            }
        }
    }
}

fn balanced(
    mut items: Vec<BooleanFormula>,
    join: fn(BooleanFormula, BooleanFormula) -> BooleanFormula,
) -> BooleanFormula {
    if items.len() == 1 {
        return items.pop().expect("one item");
    }
    let right = items.split_off(items.len() / 2);
    join(balanced(items, join), balanced(right, join))
}

/// One step of a branching program: multiply by `if_one` when the bit is set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instruction {
    pub client: usize,
    pub bit: usize,
    pub if_zero: Perm,
    pub if_one: Perm,
}

/// Group program: the ordered product of the selected elements is the
/// identity (output 0) or `accept` (output 1).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PermBranchingProgram {
    pub group: Group,
    pub instructions: Vec<Instruction>,
    pub accept: Perm,
}

impl PermBranchingProgram {
    pub fn new(group: Group, instructions: Vec<Instruction>, accept: Perm) -> Result<Self> {
        let p = Self { group, instructions, accept };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        self.group.validate()?;
        if self.instructions.is_empty() {
            return Err(SdhtError::InvalidArgument("program has no instructions".into()));
        }
        if !self.group.contains(&self.accept) || self.accept.is_identity() {
            return Err(SdhtError::InvalidArgument("accept element must be a non-identity group element".into()));
        }
        for ins in &self.instructions {
            if !self.group.contains(&ins.if_zero) || !self.group.contains(&ins.if_one) {
                return Err(SdhtError::InvalidArgument(format!("instruction element outside {:?}", self.group)));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.instructions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instructions.is_empty()
    }

    pub fn clients(&self) -> usize {
        self.instructions.iter().map(|i| i.client + 1).max().unwrap_or(0)
    }

    /// Input domain size per client, 2^(bits used).
    pub fn input_sizes(&self) -> Vec<usize> {
        let mut bits = vec![0; self.clients()];
        for ins in &self.instructions {
            bits[ins.client] = bits[ins.client].max(ins.bit + 1);
        }
        bits.into_iter().map(|b| 1usize << b).collect()
    }

    fn select(&self, j: usize, inputs: &[usize]) -> &Perm {
        let ins = &self.instructions[j];
        if (inputs[ins.client] >> ins.bit) & 1 == 1 {
            &ins.if_one
        } else {
            &ins.if_zero
        }
    }

    pub fn product(&self, inputs: &[usize]) -> Perm {
        (0..self.len()).fold(self.group.identity(), |acc, j| acc.then(self.select(j, inputs)))
    }

    fn read(&self, product: &Perm) -> Result<u8> {
        if product.is_identity() {
            Ok(0)
        } else if *product == self.accept {
            Ok(1)
        } else {
            Err(SdhtError::InvalidArgument(format!("product {:?} is neither identity nor accept", product.0)))
        }
    }

    pub fn output(&self, inputs: &[usize]) -> Result<u8> {
        self.read(&self.product(inputs))
    }

    /// Checks the program against `f` on every input.
    pub fn check_exhaustive(&self, f: impl Fn(&[usize]) -> u8) -> Result<()> {
        for x in all_inputs(&self.input_sizes()) {
            let out = self.output(&x)?;
            if out != f(&x) {
                return Err(SdhtError::InvalidArgument(format!("program outputs {out} on input {x:?}")));
            }
        }
        Ok(())
    }
}

/// Every point of a mixed-radix domain, last coordinate fastest.
pub fn all_inputs(sizes: &[usize]) -> Vec<Vec<usize>> {
    let total: usize = sizes.iter().product();
    (0..total).map(|i| mixed_radix(i, sizes)).collect()
}

fn mixed_radix(mut i: usize, sizes: &[usize]) -> Vec<usize> {
    let mut out = vec![0; sizes.len()];
    for k in (0..sizes.len()).rev() {
        out[k] = i % sizes[k];
        i /= sizes[k];
    }
    out
}

/// The 5-cycle (0 1 2 3 4).
pub fn five_cycle() -> Perm {
    Perm(vec![1, 2, 3, 4, 0])
}

/// Fixed pair of 5-cycles whose commutator is a 5-cycle: the first is
/// (0 1 2 3 4), the second the lexicographically first 5-cycle that works.
fn commutator_pair() -> (Perm, Perm, Perm) {
    let a = five_cycle();
    let s5 = Group::Symmetric { degree: 5 };
    for r in 0..s5.order() {
        let b = s5.element(r);
        if !b.is_full_cycle() {
            continue;
        }
        let c = commutator(&a, &b);
        if c.is_full_cycle() {
            return (a, b, c);
        }
    }
    unreachable!("S5 contains 5-cycles with a 5-cycle commutator")
}

/// a · b · a⁻¹ · b⁻¹ in program order.
fn commutator(a: &Perm, b: &Perm) -> Perm {
    a.then(b).then(&a.inverse()).then(&b.inverse())
}

/// Lexicographically first ρ with `ρ⁻¹ · from · ρ = to`.
fn conjugator(from: &Perm, to: &Perm) -> Perm {
    let s5 = Group::Symmetric { degree: 5 };
    (0..s5.order())
        .map(|r| s5.element(r))
        .find(|rho| from.conjugate_by(rho) == *to)
        .expect("5-cycles are conjugate in S5")
}

/// Width-5 program over S5 computing `formula`, with accept element (0 1 2 3 4).
pub fn barrington_compile(formula: &BooleanFormula) -> Result<PermBranchingProgram> {
    let pair = commutator_pair();
    let mut out = Vec::new();
    compile_into(formula, &five_cycle(), &pair, &mut out);
    PermBranchingProgram::new(Group::Symmetric { degree: 5 }, out, five_cycle())
}

fn compile_into(f: &BooleanFormula, target: &Perm, pair: &(Perm, Perm, Perm), out: &mut Vec<Instruction>) {
    let e = Perm::identity(5);
    match f {
        BooleanFormula::Leaf { client, bit } => {
            out.push(Instruction { client: *client, bit: *bit, if_zero: e, if_one: target.clone() })
        }
        BooleanFormula::Not { arg } => {
            compile_into(arg, &target.inverse(), pair, out);
            let last = out.last_mut().expect("compiled formula is non-empty");
            last.if_zero = last.if_zero.then(target);
            last.if_one = last.if_one.then(target);
        }
        BooleanFormula::And { left, right } => {
            let rho = conjugator(&pair.2, target);
            let a = pair.0.conjugate_by(&rho);
            let b = pair.1.conjugate_by(&rho);
            compile_into(left, &a, pair, out);
            compile_into(right, &b, pair, out);
            compile_into(left, &a.inverse(), pair, out);
            compile_into(right, &b.inverse(), pair, out);
        }
        BooleanFormula::Or { left, right } => {
            let g = BooleanFormula::not(BooleanFormula::and(
                BooleanFormula::not((**left).clone()),
                BooleanFormula::not((**right).clone()),
            ));
            compile_into(&g, target, pair, out);
        }
    }
}

/// Program over the cyclic group of order `modulus` computing
/// `1{Σ x_i mod modulus ∈ accept_residues}` for n one-bit clients.
pub fn counter_program(n: usize, modulus: usize, accept_residues: &[usize]) -> Result<PermBranchingProgram> {
    if n == 0 || modulus < 2 {
        return Err(SdhtError::InvalidArgument("need n ≥ 1 and modulus ≥ 2".into()));
    }
    let mut reachable: Vec<usize> = (0..=n).map(|s| s % modulus).collect();
    reachable.sort_unstable();
    reachable.dedup();
    let in_s = |r: &usize| accept_residues.contains(r);
    let accepted: Vec<usize> = reachable.iter().copied().filter(in_s).collect();
    let rejected: Vec<usize> = reachable.iter().copied().filter(|r| !in_s(r)).collect();
    if rejected != [0] || accepted.len() != 1 {
        return Err(SdhtError::UnsupportedPredicate(format!(
            "reachable residues {reachable:?} do not split into identity (rejected) and one accept element"
        )));
    }
    let step = Group::rotation(modulus, 1);
    let instructions = (0..n)
        .map(|j| Instruction { client: j, bit: 0, if_zero: Perm::identity(modulus), if_one: step.clone() })
        .collect();
    PermBranchingProgram::new(Group::Cyclic { order: modulus }, instructions, Group::rotation(modulus, accepted[0]))
}

/// Length-6 program over S3 computing majority of three one-bit clients.
///
/// Verified exhaustively in tests; its key space (6⁵) is small enough for
/// exact transcript laws.
pub fn majority3_program() -> PermBranchingProgram {
    let e = Perm(vec![0, 1, 2]);
    let steps: [(usize, [u8; 3]); 6] =
        [(0, [0, 2, 1]), (1, [1, 0, 2]), (2, [2, 0, 1]), (0, [0, 2, 1]), (1, [1, 0, 2]), (2, [1, 2, 0])];
    let instructions = steps
        .iter()
        .map(|(c, p)| Instruction { client: *c, bit: 0, if_zero: e.clone(), if_one: Perm(p.to_vec()) })
        .collect();
    PermBranchingProgram::new(Group::Symmetric { degree: 3 }, instructions, Perm(vec![2, 0, 1]))
        .expect("hard-coded program is valid")
}

/// Function on a finite product domain, stored row-major (last coordinate fastest).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruthTable {
    pub sizes: Vec<usize>,
    pub values: Vec<u8>,
}

impl TruthTable {
    pub fn new(sizes: Vec<usize>, values: Vec<u8>) -> Result<Self> {
        let total: usize = sizes.iter().product();
        if sizes.is_empty() || total == 0 || values.len() != total {
            return Err(SdhtError::InvalidArgument(format!(
                "table for domain {sizes:?} needs {total} entries, got {}",
                values.len()
            )));
        }
        if values.iter().any(|&v| v > 1) {
            return Err(SdhtError::InvalidArgument("table entries must be 0 or 1".into()));
        }
        Ok(Self { sizes, values })
    }

    pub fn from_fn(sizes: Vec<usize>, f: impl Fn(&[usize]) -> u8) -> Result<Self> {
        let values = all_inputs(&sizes).iter().map(|x| f(x)).collect();
        Self::new(sizes, values)
    }

    /// Two-bit function number `code` (0..16): f(x1, x2) = bit (2·x1 + x2) of code.
    pub fn two_bit(code: u8) -> Self {
        Self::from_fn(vec![2, 2], |x| (code >> (2 * x[0] + x[1])) & 1).expect("valid table")
    }

    pub fn majority(n: usize) -> Result<Self> {
        Self::from_fn(vec![2; n], |x| u8::from(2 * x.iter().sum::<usize>() > n))
    }

    pub fn parity(n: usize) -> Result<Self> {
        Self::from_fn(vec![2; n], |x| (x.iter().sum::<usize>() % 2) as u8)
    }

    /// Pads every coordinate to the next power of two; padding values behave
    /// like symbol 0.
    pub fn bit_encoded(&self) -> TruthTable {
        let sizes: Vec<usize> = self.sizes.iter().map(|s| s.next_power_of_two().max(2)).collect();
        Self::from_fn(sizes, |x| {
            let y: Vec<usize> = x.iter().zip(&self.sizes).map(|(&v, &s)| if v < s { v } else { 0 }).collect();
            self.get(&y)
        })
        .expect("padded table is valid")
    }

    fn index(&self, x: &[usize]) -> usize {
        x.iter().zip(&self.sizes).fold(0, |acc, (v, s)| acc * s + v)
    }

    pub fn get(&self, x: &[usize]) -> u8 {
        self.values[self.index(x)]
    }

    /// Invariant under permuting coordinates (requires equal coordinate sizes).
    pub fn is_symmetric(&self) -> bool {
        if self.sizes.iter().any(|&s| s != self.sizes[0]) {
            return false;
        }
        all_inputs(&self.sizes).iter().all(|x| {
            let mut y = x.clone();
            y.sort_unstable();
            self.get(x) == self.get(&y)
        })
    }
}

/// Per-client message.
pub type Message = Vec<u32>;

/// A PSM protocol: shared key, one encoder per client and a decoder.
pub trait PsmProtocol: Sync {
    type Key: Clone + Send + Sync;

    fn clients(&self) -> usize;
    /// Input domain size per client.
    fn input_sizes(&self) -> Vec<usize>;
    /// Number of keys when it fits in u64; keys are uniform over `0..key_count`.
    fn key_count(&self) -> Option<u64>;
    fn key(&self, index: u64) -> Self::Key;
    fn sample_key<R: Rng>(&self, rng: &mut R) -> Self::Key;
    fn encode(&self, client: usize, input: usize, key: &Self::Key) -> Message;
    fn decode(&self, messages: &[Message]) -> Result<u8>;
    fn key_bits(&self) -> u64;
    fn message_bits(&self) -> Vec<u64>;
    /// Statistic of the whole transcript that carries the output (e.g. the group product).
    fn transcript_statistic(&self, _messages: &[Message]) -> Option<u64> {
        None
    }

    fn transcript(&self, inputs: &[usize], key: &Self::Key) -> Vec<Message> {
        (0..self.clients()).map(|c| self.encode(c, inputs[c], key)).collect()
    }
}

/// Seeded faults used to check that verification notices broken protocols.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TableDefect {
    /// The pad is always zero.
    DroppedPad,
    /// The column permutation is always the identity.
    BiasedPermutation,
}

/// Two-party PSM for a table f: X1 × X2 → {0,1}.
///
/// Key: a permutation π of X2 and pad bits r over X2. Client 2 sends
/// (π(x2), r[π(x2)]); client 1 sends the row f(x1, ·) permuted by π and
/// XORed with r; the decoder XORs the selected entry with the pad bit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableProtocol {
    pub table: TruthTable,
    pub defect: Option<TableDefect>,
}

pub fn fkn_two_party(table: &TruthTable) -> Result<TableProtocol> {
    if table.sizes.len() != 2 {
        return Err(SdhtError::InvalidArgument("two-party protocol needs a two-dimensional table".into()));
    }
    let cols = table.sizes[1];
    if cols > 20 || (factorial(cols) as f64) * 2f64.powi(cols as i32) > ENUMERATION_BUDGET {
        return Err(SdhtError::BudgetExceeded {
            count: (factorial(cols.min(20)) as f64) * 2f64.powi(cols as i32),
            budget: ENUMERATION_BUDGET,
        });
    }
    Ok(TableProtocol { table: table.clone(), defect: None })
}

impl TableProtocol {
    pub fn with_defect(mut self, defect: TableDefect) -> Self {
        self.defect = Some(defect);
        self
    }

    fn cols(&self) -> usize {
        self.table.sizes[1]
    }

    fn apply_defect(&self, (perm, pad): (Perm, Vec<u8>)) -> (Perm, Vec<u8>) {
        match self.defect {
            Some(TableDefect::DroppedPad) => (perm, vec![0; pad.len()]),
            Some(TableDefect::BiasedPermutation) => (Perm::identity(perm.points()), pad),
            None => (perm, pad),
        }
    }
}

impl PsmProtocol for TableProtocol {
    type Key = (Perm, Vec<u8>);

    fn clients(&self) -> usize {
        2
    }

    fn input_sizes(&self) -> Vec<usize> {
        self.table.sizes.clone()
    }

    fn key_count(&self) -> Option<u64> {
        Some(factorial(self.cols()) << self.cols())
    }

    fn key(&self, index: u64) -> Self::Key {
        let k = self.cols();
        let perm = Perm::unrank(k, index >> k);
        let pad = (0..k).map(|j| ((index >> j) & 1) as u8).collect();
        self.apply_defect((perm, pad))
    }

    fn sample_key<R: Rng>(&self, rng: &mut R) -> Self::Key {
        let k = self.cols();
        let mut v: Vec<u8> = (0..k as u8).collect();
        v.shuffle(rng);
        let pad = (0..k).map(|_| rng.gen_range(0..2u8)).collect();
        self.apply_defect((Perm(v), pad))
    }

    fn encode(&self, client: usize, input: usize, (perm, pad): &Self::Key) -> Message {
        if client == 0 {
            let inv = perm.inverse();
            (0..self.cols()).map(|j| u32::from(self.table.get(&[input, inv.0[j] as usize]) ^ pad[j])).collect()
        } else {
            let j = perm.0[input] as usize;
            vec![j as u32, u32::from(pad[j])]
        }
    }

    fn decode(&self, messages: &[Message]) -> Result<u8> {
        let (row, sel) = (&messages[0], &messages[1]);
        let j = sel[0] as usize;
        if j >= row.len() {
            return Err(SdhtError::InvalidArgument("selected column outside the row".into()));
        }
        Ok((row[j] ^ sel[1]) as u8)
    }

    fn key_bits(&self) -> u64 {
        ceil_log2(factorial(self.cols()) as usize) + self.cols() as u64
    }

    fn message_bits(&self) -> Vec<u64> {
        vec![self.cols() as u64, ceil_log2(self.cols()) + 1]
    }
}

/// Seeded fault for randomized group programs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProgramDefect {
    /// Every randomizer equals the first one.
    ReusedKeyElement,
}

/// Randomized group program: instruction j's owner sends
/// `g_{j−1}⁻¹ · σ_j(x) · g_j` with fresh uniform g's and `g_0 = g_L = e`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupProgramProtocol {
    pub program: PermBranchingProgram,
    pub defect: Option<ProgramDefect>,
}

pub fn kilian_randomize(program: &PermBranchingProgram) -> Result<GroupProgramProtocol> {
    program.validate()?;
    // Every input must land on identity or accept.
    for x in all_inputs(&program.input_sizes()) {
        program.output(&x)?;
    }
    Ok(GroupProgramProtocol { program: program.clone(), defect: None })
}

impl GroupProgramProtocol {
    pub fn with_defect(mut self, defect: ProgramDefect) -> Self {
        self.defect = Some(defect);
        self
    }

    fn randomizers(&self) -> usize {
        self.program.len() - 1
    }

    fn apply_defect(&self, mut key: Vec<Perm>) -> Vec<Perm> {
        if self.defect == Some(ProgramDefect::ReusedKeyElement) && !key.is_empty() {
            let first = key[0].clone();
            key.iter_mut().for_each(|g| *g = first.clone());
        }
        key
    }

    fn message_element(&self, j: usize, sigma: &Perm, key: &[Perm]) -> Perm {
        let e = self.program.group.identity();
        let prev = if j == 0 { &e } else { &key[j - 1] };
        let next = if j + 1 == self.program.len() { &e } else { &key[j] };
        prev.inverse().then(sigma).then(next)
    }

    fn product_of(&self, messages: &[Message]) -> Result<Perm> {
        let g = self.program.group;
        let mut cursor = vec![0usize; self.clients()];
        let mut acc = g.identity();
        for ins in &self.program.instructions {
            let msg = messages
                .get(ins.client)
                .and_then(|m| m.get(cursor[ins.client]))
                .ok_or_else(|| SdhtError::InvalidArgument("transcript too short".into()))?;
            cursor[ins.client] += 1;
            if *msg as u64 >= g.order() {
                return Err(SdhtError::InvalidArgument("message outside the group".into()));
            }
            acc = acc.then(&g.element(*msg as u64));
        }
        Ok(acc)
    }
}

impl PsmProtocol for GroupProgramProtocol {
    type Key = Vec<Perm>;

    fn clients(&self) -> usize {
        self.program.clients()
    }

    fn input_sizes(&self) -> Vec<usize> {
        self.program.input_sizes()
    }

    fn key_count(&self) -> Option<u64> {
        self.program.group.order().checked_pow(self.randomizers() as u32)
    }

    fn key(&self, mut index: u64) -> Self::Key {
        let g = self.program.group;
        let key = (0..self.randomizers())
            .map(|_| {
                let e = g.element(index % g.order());
                index /= g.order();
                e
            })
            .collect();
        self.apply_defect(key)
    }

    fn sample_key<R: Rng>(&self, rng: &mut R) -> Self::Key {
        let g = self.program.group;
        let key = (0..self.randomizers()).map(|_| g.random(rng)).collect();
        self.apply_defect(key)
    }

    fn encode(&self, client: usize, input: usize, key: &Self::Key) -> Message {
        let g = self.program.group;
        self.program
            .instructions
            .iter()
            .enumerate()
            .filter(|(_, ins)| ins.client == client)
            .map(|(j, ins)| {
                let sigma = if (input >> ins.bit) & 1 == 1 { &ins.if_one } else { &ins.if_zero };
                g.index_of(&self.message_element(j, sigma, key)) as u32
            })
            .collect()
    }

    fn decode(&self, messages: &[Message]) -> Result<u8> {
        self.program.read(&self.product_of(messages)?)
    }

    fn key_bits(&self) -> u64 {
        self.randomizers() as u64 * self.program.group.element_bits()
    }

    fn message_bits(&self) -> Vec<u64> {
        let mut counts = vec![0u64; self.clients()];
        for ins in &self.program.instructions {
            counts[ins.client] += 1;
        }
        counts.into_iter().map(|c| c * self.program.group.element_bits()).collect()
    }

    fn transcript_statistic(&self, messages: &[Message]) -> Option<u64> {
        self.product_of(messages).ok().map(|p| self.program.group.index_of(&p))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerifyMode {
    Exhaustive,
    Sampled,
}

/// Outcome of checking both PSM clauses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub mode: VerifyMode,
    pub correctness_pass: bool,
    pub privacy_pass: bool,
    /// (input, key index or trial) where decoding disagreed with f.
    pub correctness_counterexample: Option<(Vec<usize>, u64)>,
    /// Two same-output inputs whose transcript laws differ.
    pub privacy_counterexample: Option<(Vec<usize>, Vec<usize>)>,
    pub keys_checked: u64,
    /// Sampled mode: one p-value per (pair, statistic) test.
    pub p_values: Vec<f64>,
    pub min_p_value: Option<f64>,
    /// Per-test significance after Bonferroni correction.
    pub alpha: Option<f64>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.correctness_pass && self.privacy_pass
    }
}

/// Family-wise significance of the sampled privacy test.
pub const PRIVACY_SIGNIFICANCE: f64 = 0.01;

pub fn psm_verify<P: PsmProtocol>(
    protocol: &P,
    f: &TruthTable,
    mode: VerifyMode,
    trials: u64,
    seed: u64,
) -> Result<VerificationReport> {
    if protocol.input_sizes() != f.sizes {
        return Err(SdhtError::Dimension { expected: f.sizes.len(), got: protocol.input_sizes().len() });
    }
    match mode {
        VerifyMode::Exhaustive => verify_exhaustive(protocol, f),
        VerifyMode::Sampled => verify_sampled(protocol, f, trials, seed),
    }
}

type TranscriptLaw = BTreeMap<Vec<Message>, u64>;

fn exhaustive_key_count<P: PsmProtocol>(protocol: &P) -> Result<u64> {
    match protocol.key_count() {
        Some(k) if k as f64 <= ENUMERATION_BUDGET => Ok(k),
        k => {
            Err(SdhtError::BudgetExceeded { count: k.map_or(f64::INFINITY, |k| k as f64), budget: ENUMERATION_BUDGET })
        }
    }
}

/// Transcript counts over all keys for each input (keys are uniform).
fn transcript_laws<P: PsmProtocol>(protocol: &P, inputs: &[Vec<usize>], keys: u64) -> Vec<TranscriptLaw> {
    inputs
        .par_iter()
        .map(|x| {
            let mut law = TranscriptLaw::new();
            for k in 0..keys {
                *law.entry(protocol.transcript(x, &protocol.key(k))).or_insert(0) += 1;
            }
            law
        })
        .collect()
}

fn verify_exhaustive<P: PsmProtocol>(protocol: &P, f: &TruthTable) -> Result<VerificationReport> {
    let keys = exhaustive_key_count(protocol)?;
    let inputs = all_inputs(&f.sizes);
    let mut correctness_counterexample = None;
    'outer: for x in &inputs {
        for k in 0..keys {
            let t = protocol.transcript(x, &protocol.key(k));
            if protocol.decode(&t).ok() != Some(f.get(x)) {
                correctness_counterexample = Some((x.clone(), k));
                break 'outer;
            }
        }
    }
    let laws = transcript_laws(protocol, &inputs, keys);
    let mut privacy_counterexample = None;
    let mut reference: [Option<usize>; 2] = [None, None];
    for (i, x) in inputs.iter().enumerate() {
        let out = f.get(x) as usize;
        match reference[out] {
            None => reference[out] = Some(i),
            Some(r) if laws[r] != laws[i] => {
                privacy_counterexample = Some((inputs[r].clone(), x.clone()));
                break;
            }
            _ => {}
        }
    }
    Ok(VerificationReport {
        mode: VerifyMode::Exhaustive,
        correctness_pass: correctness_counterexample.is_none(),
        privacy_pass: privacy_counterexample.is_none(),
        correctness_counterexample,
        privacy_counterexample,
        keys_checked: keys,
        p_values: Vec::new(),
        min_p_value: None,
        alpha: None,
    })
}

type Counts<T> = BTreeMap<T, u64>;

/// Per-input sample summary: counts per message position and of the transcript statistic.
#[derive(Default)]
struct Samples {
    first_failure: Option<u64>,
    positions: Vec<Counts<u32>>,
    statistic: Counts<Option<u64>>,
}

impl Samples {
    fn absorb(mut self, other: Samples) -> Samples {
        self.first_failure = match (self.first_failure, other.first_failure) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        if self.positions.len() < other.positions.len() {
            self.positions.resize(other.positions.len(), Counts::new());
        }
        for (mine, theirs) in self.positions.iter_mut().zip(other.positions) {
            for (k, c) in theirs {
                *mine.entry(k).or_insert(0) += c;
            }
        }
        for (k, c) in other.statistic {
            *self.statistic.entry(k).or_insert(0) += c;
        }
        self
    }
}

fn sample_input<P: PsmProtocol>(protocol: &P, x: &[usize], want: u8, trials: u64, seed: u64, stream: u64) -> Samples {
    let base = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    (0..trials)
        .into_par_iter()
        .fold(Samples::default, |mut acc, t| {
            let mut rng = stream_rng(base, t);
            let key = protocol.sample_key(&mut rng);
            let tr = protocol.transcript(x, &key);
            if protocol.decode(&tr).ok() != Some(want) && acc.first_failure.is_none() {
                acc.first_failure = Some(t);
            }
            *acc.statistic.entry(protocol.transcript_statistic(&tr)).or_insert(0) += 1;
            let flat: Vec<u32> = tr.into_iter().flatten().collect();
            if acc.positions.len() < flat.len() {
                acc.positions.resize(flat.len(), Counts::new());
            }
            for (p, v) in acc.positions.iter_mut().zip(flat) {
                *p.entry(v).or_insert(0) += 1;
            }
            acc
        })
        .reduce(Samples::default, Samples::absorb)
}

/// Two-sample chi-square homogeneity test; p-value 1 when only one category occurs.
pub fn chi_square_two_sample<T: Ord + Clone>(a: &[T], b: &[T]) -> f64 {
    let count = |xs: &[T]| {
        let mut c = Counts::new();
        for v in xs {
            *c.entry(v.clone()).or_insert(0) += 1;
        }
        c
    };
    chi_square_counts(&count(a), &count(b))
}

fn chi_square_counts<T: Ord + Clone>(a: &Counts<T>, b: &Counts<T>) -> f64 {
    let mut table: BTreeMap<&T, (f64, f64)> = BTreeMap::new();
    for (k, &c) in a {
        table.entry(k).or_insert((0.0, 0.0)).0 += c as f64;
    }
    for (k, &c) in b {
        table.entry(k).or_insert((0.0, 0.0)).1 += c as f64;
    }
    let na: f64 = a.values().sum::<u64>() as f64;
    let nb: f64 = b.values().sum::<u64>() as f64;
    let df = table.len().saturating_sub(1);
    if df == 0 || na == 0.0 || nb == 0.0 {
        return 1.0;
    }
    let total = na + nb;
    let stat: f64 = table
        .values()
        .map(|&(ca, cb)| {
            let col = ca + cb;
            let (ea, eb) = (na * col / total, nb * col / total);
            (ca - ea).powi(2) / ea + (cb - eb).powi(2) / eb
        })
        .sum();
    let chi = ChiSquared::new(df as f64).expect("positive degrees of freedom");
    1.0 - chi.cdf(stat)
}

fn verify_sampled<P: PsmProtocol>(protocol: &P, f: &TruthTable, trials: u64, seed: u64) -> Result<VerificationReport> {
    if trials == 0 {
        return Err(SdhtError::InvalidArgument("trials must be at least 1".into()));
    }
    let inputs = all_inputs(&f.sizes);
    let samples: Vec<Samples> =
        inputs.iter().enumerate().map(|(i, x)| sample_input(protocol, x, f.get(x), trials, seed, i as u64)).collect();
    let mut correctness_counterexample = None;
    for (x, s) in inputs.iter().zip(&samples) {
        if let Some(t) = s.first_failure {
            correctness_counterexample = Some((x.clone(), t));
            break;
        }
    }
    // Pairs (reference, other) within each output class.
    let mut pairs = Vec::new();
    let mut reference: [Option<usize>; 2] = [None, None];
    for (i, x) in inputs.iter().enumerate() {
        let out = f.get(x) as usize;
        match reference[out] {
            None => reference[out] = Some(i),
            Some(r) => pairs.push((r, i)),
        }
    }
    let mut p_values = Vec::new();
    let mut worst: Option<(f64, usize, usize)> = None;
    for &(r, i) in &pairs {
        let (a, b) = (&samples[r], &samples[i]);
        let mut ps: Vec<f64> = a.positions.iter().zip(&b.positions).map(|(u, v)| chi_square_counts(u, v)).collect();
        ps.push(chi_square_counts(&a.statistic, &b.statistic));
        for p in ps {
            if worst.is_none_or(|w| p < w.0) {
                worst = Some((p, r, i));
            }
            p_values.push(p);
        }
    }
    let alpha = PRIVACY_SIGNIFICANCE / p_values.len().max(1) as f64;
    let privacy_counterexample = worst.filter(|w| w.0 < alpha).map(|w| (inputs[w.1].clone(), inputs[w.2].clone()));
    Ok(VerificationReport {
        mode: VerifyMode::Sampled,
        correctness_pass: correctness_counterexample.is_none(),
        privacy_pass: privacy_counterexample.is_none(),
        correctness_counterexample,
        privacy_counterexample,
        keys_checked: trials * inputs.len() as u64,
        min_p_value: worst.map(|w| w.0),
        p_values,
        alpha: Some(alpha),
    })
}

/// Result of wrapping a verified PSM as a hypothesis-testing scheme.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsmSdhtReport {
    pub report: EvaluationReport,
    pub verification: VerificationReport,
    /// Allowed slack on δ ≤ ε: 1e−9 exact, 4·stderr sampled.
    pub tolerance: f64,
    pub delta_stderr: Option<f64>,
    /// δ ≤ ε + tolerance.
    pub bound_holds: bool,
}

/// Exact law of the inputs: probability of each point of Xⁿ under μ^⊗n.
/// Coordinates wider than the alphabet (bit-encoding padding) get mass 0.
fn input_probs(sizes: &[usize], mu: &FiniteDistribution) -> Result<Vec<f64>> {
    if let Some(&s) = sizes.iter().find(|&&s| s < mu.alphabet_size()) {
        return Err(SdhtError::Dimension { expected: mu.alphabet_size(), got: s });
    }
    let p = |v: usize| if v < mu.alphabet_size() { mu.get(v) } else { 0.0 };
    Ok(all_inputs(sizes).iter().map(|x| x.iter().map(|&v| p(v)).product()).collect())
}

/// ε of the symmetric detector table: max over b, μ ∈ H_b of P[f(X) ≠ b].
pub fn table_correctness_error(f: &TruthTable, h0: &[FiniteDistribution], h1: &[FiniteDistribution]) -> Result<f64> {
    let mut eps: f64 = 0.0;
    for (label, class) in [(0u8, h0), (1u8, h1)] {
        for mu in class {
            let probs = input_probs(&f.sizes, mu)?;
            let e: f64 = probs.iter().zip(&f.values).filter(|(_, &v)| v != label).map(|(p, _)| p).sum();
            eps = eps.max(e);
        }
    }
    Ok(eps)
}

/// Wraps a PSM for the symmetric detector `f` as an (ε, δ) scheme.
///
/// The protocol is verified first (exhaustively when its key space fits the
/// budget, otherwise by sampling) and refused if either clause fails. In
/// exhaustive mode transcript laws are exact; otherwise δ is estimated from
/// the transcript statistic.
pub fn psm_to_sdht<P: PsmProtocol>(
    f: &TruthTable,
    protocol: &P,
    h0: &[FiniteDistribution],
    h1: &[FiniteDistribution],
    trials: u64,
    seed: u64,
) -> Result<PsmSdhtReport> {
    if h0.is_empty() || h1.is_empty() {
        return Err(SdhtError::InvalidArgument("both classes must be non-empty".into()));
    }
    if !f.is_symmetric() {
        return Err(SdhtError::InvalidArgument("detector table must be symmetric".into()));
    }
    let exact = exhaustive_key_count(protocol).is_ok();
    let mode = if exact { VerifyMode::Exhaustive } else { VerifyMode::Sampled };
    let verification = psm_verify(protocol, f, mode, trials, seed)?;
    if !verification.passed() {
        return Err(SdhtError::Unverified(format!("{:?} verification failed: {:?}", mode, verification)));
    }
    let epsilon = table_correctness_error(f, h0, h1)?;
    let inputs = all_inputs(&f.sizes);
    let (delta, delta_stderr, tolerance, method) = if exact {
        let keys = exhaustive_key_count(protocol)?;
        let laws = transcript_laws(protocol, &inputs, keys);
        let mut delta: f64 = 0.0;
        for class in [h0, h1] {
            let mixed = class
                .iter()
                .map(|mu| {
                    let probs = input_probs(&f.sizes, mu)?;
                    let mut out: HashMap<&Vec<Message>, f64> = HashMap::new();
                    for (p, law) in probs.iter().zip(&laws) {
                        for (t, &c) in law {
                            *out.entry(t).or_insert(0.0) += p * c as f64 / keys as f64;
                        }
                    }
                    Ok(out)
                })
                .collect::<Result<Vec<_>>>()?;
            for i in 0..mixed.len() {
                for j in i + 1..mixed.len() {
                    delta = delta.max(map_tv(&mixed[i], &mixed[j]));
                }
            }
        }
        (delta, None, 1e-9, Method::Exact)
    } else {
        let (delta, se) = sampled_delta(protocol, f, h0, h1, trials, seed)?;
        (delta, Some(se), 4.0 * se, Method::MonteCarlo)
    };
    let bits: u64 = protocol.message_bits().iter().sum();
    let report = EvaluationReport {
        epsilon,
        delta,
        comm_bits: bits,
        key_bits: protocol.key_bits(),
        method,
        trials: (!exact).then_some(trials),
        seed: (!exact).then_some(seed),
        epsilon_stderr: None,
        warnings: Vec::new(),
    };
    Ok(PsmSdhtReport { report, verification, tolerance, delta_stderr, bound_holds: delta <= epsilon + tolerance })
}

fn map_tv<K: std::hash::Hash + Eq>(a: &HashMap<K, f64>, b: &HashMap<K, f64>) -> f64 {
    let mut s = 0.0;
    for (k, &v) in a {
        s += (v - b.get(k).copied().unwrap_or(0.0)).abs();
    }
    for (k, &v) in b {
        if !a.contains_key(k) {
            s += v;
        }
    }
    (s / 2.0).clamp(0.0, 1.0)
}

/// δ estimate from the decoded output of sampled transcripts; the verified
/// privacy clause makes the transcript law a function of this output's law.
fn sampled_delta<P: PsmProtocol>(
    protocol: &P,
    f: &TruthTable,
    h0: &[FiniteDistribution],
    h1: &[FiniteDistribution],
    trials: u64,
    seed: u64,
) -> Result<(f64, f64)> {
    let mut delta: f64 = 0.0;
    let mut se_at = 0.0;
    for (b, class) in [h0, h1].iter().enumerate() {
        let freqs = class
            .iter()
            .enumerate()
            .map(|(j, mu)| {
                let sampler = crate::rng::sampler(mu.probs());
                let base = seed ^ ((b as u64) << 40 | j as u64 | 1 << 62);
                let ones: u64 = (0..trials)
                    .into_par_iter()
                    .map(|t| {
                        let mut rng = stream_rng(base, t);
                        let x: Vec<usize> = (0..f.sizes.len()).map(|_| crate::rng::draw(&sampler, &mut rng)).collect();
                        let key = protocol.sample_key(&mut rng);
                        let tr = protocol.transcript(&x, &key);
                        protocol.decode(&tr).map(u64::from)
                    })
                    .collect::<Result<Vec<_>>>()?
                    .into_iter()
                    .sum();
                Ok(ones as f64 / trials as f64)
            })
            .collect::<Result<Vec<f64>>>()?;
        for i in 0..freqs.len() {
            for j in i + 1..freqs.len() {
                let d = (freqs[i] - freqs[j]).abs();
                let se = ((freqs[i] * (1.0 - freqs[i]) + freqs[j] * (1.0 - freqs[j])) / trials as f64).sqrt();
                if d >= delta {
                    delta = d;
                    se_at = se;
                }
            }
        }
    }
    Ok((delta, se_at))
}

/// Reference cost exponents of the symmetric-function PSM that cost reports compare against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostTargets {
    /// 2⌈|X|/3⌉: exponent of n in communication and key length of the scheme.
    pub exponent: u32,
    /// n^exponent.
    pub reference: f64,
    /// 2⌈|X|/3⌉ + 1: exponent quoted for the underlying PSM.
    pub psm_exponent: u32,
    /// n^psm_exponent.
    pub psm_reference: f64,
}

pub fn es25_cost_targets(n: u64, alphabet_size: u64) -> Result<CostTargets> {
    if n == 0 || alphabet_size == 0 {
        return Err(SdhtError::InvalidArgument("n and alphabet size must be positive".into()));
    }
    let exponent = (2 * alphabet_size.div_ceil(3)) as u32;
    Ok(CostTargets {
        exponent,
        reference: (n as f64).powi(exponent as i32),
        psm_exponent: exponent + 1,
        psm_reference: (n as f64).powi(exponent as i32 + 1),
    })
}
