//! Empirical trust in enumerable programs. Every program over a tiny
//! two-register machine either emits a zero (misbehaves) after some number
//! of ones, halts without ever misbehaving, provably never misbehaves
//! (caught by sound loop analysis), or outruns the step budget (censored).
//! The census over all length-L programs yields a toy analogue of the
//! maximum finite time-to-first-zero, always a certified lower bound
//! because censoring is reported rather than guessed.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Instr {
    Emit1,
    Emit0,
    Halt,
    Inc(u8),
    Dec(u8),
    /// Jump to the absolute index when the register is nonzero.
    Jnz(u8, usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ToyProgram {
    pub instructions: Vec<Instr>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ProgramError {
    #[error("jump target {target} out of bounds for length {len}")]
    JumpOutOfBounds { target: usize, len: usize },
    #[error("register index {0} out of range")]
    BadRegister(u8),
}

impl ToyProgram {
    pub fn new(instructions: Vec<Instr>) -> Result<ToyProgram, ProgramError> {
        let p = ToyProgram { instructions };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), ProgramError> {
        let len = self.instructions.len();
        for instr in &self.instructions {
            match *instr {
                Instr::Inc(r) | Instr::Dec(r) | Instr::Jnz(r, _) if r > 1 => {
                    return Err(ProgramError::BadRegister(r))
                }
                Instr::Jnz(_, target) if target >= len => {
                    return Err(ProgramError::JumpOutOfBounds { target, len })
                }
                _ => {}
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
}

/// Result of running a program against the step budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RunOutcome {
    /// The program emitted a zero after this many ones.
    EmittedZero { ones_before: u64 },
    /// The program halted without ever emitting a zero: trustworthy with
    /// finite output.
    HaltedNoZero { ones: u64 },
    /// Sound loop analysis proved the program will never emit a zero.
    ProvenNeverZero { ones_so_far: u64 },
    /// The budget ran out before any of the above could be established.
    Censored { ones_so_far: u64 },
}

impl RunOutcome {
    pub fn time_to_first_zero(&self) -> Option<u64> {
        match self {
            RunOutcome::EmittedZero { ones_before } => Some(*ones_before),
            _ => None,
        }
    }

    pub fn is_censored(&self) -> bool {
        matches!(self, RunOutcome::Censored { .. })
    }
}

#[derive(Clone, Copy)]
struct MachineState {
    pc: usize,
    regs: [u64; 2],
}

/// Count ones emitted before the first zero, with a step budget. Two sound
/// nontermination proofs close most budget gaps: an exact state repeat, and
/// a same-pc state that dominates an ancestor componentwise where every
/// grown register stayed positive throughout the segment (the segment then
/// replays forever with the same branching).
pub fn time_to_first_zero(program: &ToyProgram, step_budget: u64) -> RunOutcome {
    assert!(step_budget >= 1);
    let code = &program.instructions;
    let mut state = MachineState { pc: 0, regs: [0, 0] };
    let mut ones = 0u64;
    // Full state history plus per-pc ancestor indices.
    let mut history: Vec<(usize, u64, u64)> = Vec::new();
    let mut by_pc: Vec<Vec<usize>> = vec![Vec::new(); code.len().max(1)];
    for _ in 0..step_budget {
        if state.pc >= code.len() {
            return RunOutcome::HaltedNoZero { ones };
        }
        // Loop analysis against ancestors at the same program counter.
        let snapshot = (state.pc, state.regs[0], state.regs[1]);
        for &anc in &by_pc[state.pc] {
            let (_, a0, a1) = history[anc];
            if proves_never_zero(&history, anc, (a0, a1), (snapshot.1, snapshot.2)) {
                return RunOutcome::ProvenNeverZero { ones_so_far: ones };
            }
        }
        by_pc[state.pc].push(history.len());
        history.push(snapshot);

        match code[state.pc] {
            Instr::Emit1 => {
                ones += 1;
                state.pc += 1;
            }
            Instr::Emit0 => return RunOutcome::EmittedZero { ones_before: ones },
            Instr::Halt => return RunOutcome::HaltedNoZero { ones },
            Instr::Inc(r) => {
                state.regs[r as usize] += 1;
                state.pc += 1;
            }
            Instr::Dec(r) => {
                state.regs[r as usize] = state.regs[r as usize].saturating_sub(1);
                state.pc += 1;
            }
            Instr::Jnz(r, target) => {
                if state.regs[r as usize] != 0 {
                    state.pc = target;
                } else {
                    state.pc += 1;
                }
            }
        }
    }
    RunOutcome::Censored { ones_so_far: ones }
}

/// Domination check: registers grew (or held) since the ancestor, and every
/// register that grew stayed at least 1 across the whole segment, so the
/// segment's branch decisions replay verbatim, shifted up, forever. An
/// exact repeat is the special case of zero growth.
fn proves_never_zero(
    history: &[(usize, u64, u64)],
    ancestor: usize,
    anc_regs: (u64, u64),
    cur_regs: (u64, u64),
) -> bool {
    let deltas = [
        cur_regs.0 as i128 - anc_regs.0 as i128,
        cur_regs.1 as i128 - anc_regs.1 as i128,
    ];
    if deltas.iter().any(|&d| d < 0) {
        return false;
    }
    let mut mins = [u64::MAX; 2];
    for &(_, r0, r1) in &history[ancestor..] {
        mins[0] = mins[0].min(r0);
        mins[1] = mins[1].min(r1);
    }
    deltas
        .iter()
        .zip(mins.iter())
        .all(|(&d, &m)| d == 0 || m >= 1)
}

/// A second, deliberately naive interpreter: step until the first zero or
/// the step limit, no analysis at all. Used to recheck census winners.
pub fn naive_time_to_first_zero(program: &ToyProgram, steps: u64) -> Option<u64> {
    let code = &program.instructions;
    let mut pc = 0usize;
    let mut regs = [0u64; 2];
    let mut ones = 0u64;
    for _ in 0..steps {
        if pc >= code.len() {
            return None;
        }
        match code[pc] {
            Instr::Emit1 => {
                ones += 1;
                pc += 1;
            }
            Instr::Emit0 => return Some(ones),
            Instr::Halt => return None,
            Instr::Inc(r) => {
                regs[r as usize] += 1;
                pc += 1;
            }
            Instr::Dec(r) => {
                regs[r as usize] = regs[r as usize].saturating_sub(1);
                pc += 1;
            }
            Instr::Jnz(r, target) => {
                if regs[r as usize] != 0 {
                    pc = target;
                } else {
                    pc += 1;
                }
            }
        }
    }
    None
}

// ---------------------------------------------------------------------------
// Enumeration.
// ---------------------------------------------------------------------------

pub const LENGTH_CAP: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("program length {requested} exceeds the enumeration cap {cap}")]
pub struct LengthCapExceeded {
    pub requested: usize,
    pub cap: usize,
}

/// Instruction alphabet for programs of the given length: jumps may target
/// any index inside the program.
pub fn instruction_alphabet(len: usize) -> Vec<Instr> {
    let mut out = vec![
        Instr::Emit1,
        Instr::Emit0,
        Instr::Halt,
        Instr::Inc(0),
        Instr::Inc(1),
        Instr::Dec(0),
        Instr::Dec(1),
    ];
    for target in 0..len {
        out.push(Instr::Jnz(0, target));
        out.push(Instr::Jnz(1, target));
    }
    out
}

/// All syntactically valid programs of exactly `len` instructions, in
/// deterministic odometer order.
pub fn enumerate_programs(len: usize) -> Result<Vec<ToyProgram>, LengthCapExceeded> {
    if len > LENGTH_CAP {
        return Err(LengthCapExceeded {
            requested: len,
            cap: LENGTH_CAP,
        });
    }
    if len == 0 {
        return Ok(Vec::new());
    }
    let alphabet = instruction_alphabet(len);
    let mut out = Vec::new();
    let mut idx = vec![0usize; len];
    loop {
        out.push(ToyProgram {
            instructions: idx.iter().map(|&i| alphabet[i]).collect(),
        });
        let mut i = len;
        loop {
            if i == 0 {
                return Ok(out);
            }
            i -= 1;
            idx[i] += 1;
            if idx[i] < alphabet.len() {
                break;
            }
            idx[i] = 0;
        }
    }
}

/// Expected census size: (7 + 2 * len) ^ len.
pub fn program_count(len: usize) -> u64 {
    (7 + 2 * len as u64).pow(len as u32)
}

// ---------------------------------------------------------------------------
// The census report.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrustReport {
    pub length: usize,
    pub step_budget: u64,
    pub program_count: u64,
    pub emitted_zero: u64,
    pub halted_no_zero: u64,
    pub proven_never_zero: u64,
    pub censored: u64,
    /// Maximum finite time-to-first-zero over uncensored misbehaving
    /// programs. A certified lower bound on the true maximum whenever any
    /// program is censored, and serialized under that label.
    #[serde(rename = "max_time_to_first_zero_lower_bound")]
    pub max_time_to_first_zero: Option<u64>,
    /// A program achieving the maximum (first in enumeration order).
    pub witness: Option<ToyProgram>,
    pub mean_finite_time_to_first_zero: f64,
    /// The maximum divided by the instruction census size; labeled as the
    /// per-program average-case reading of the bound.
    pub max_over_census: f64,
}

pub fn bb_report(len: usize, step_budget: u64) -> Result<TrustReport, LengthCapExceeded> {
    let programs = enumerate_programs(len)?;
    let mut report = TrustReport {
        length: len,
        step_budget,
        program_count: programs.len() as u64,
        emitted_zero: 0,
        halted_no_zero: 0,
        proven_never_zero: 0,
        censored: 0,
        max_time_to_first_zero: None,
        witness: None,
        mean_finite_time_to_first_zero: 0.0,
        max_over_census: 0.0,
    };
    let mut finite_sum = 0u64;
    for program in &programs {
        match time_to_first_zero(program, step_budget) {
            RunOutcome::EmittedZero { ones_before } => {
                report.emitted_zero += 1;
                finite_sum += ones_before;
                if report
                    .max_time_to_first_zero
                    .is_none_or(|best| ones_before > best)
                {
                    report.max_time_to_first_zero = Some(ones_before);
                    report.witness = Some(program.clone());
                }
            }
            RunOutcome::HaltedNoZero { .. } => report.halted_no_zero += 1,
            RunOutcome::ProvenNeverZero { .. } => report.proven_never_zero += 1,
            RunOutcome::Censored { .. } => report.censored += 1,
        }
    }
    if report.emitted_zero > 0 {
        report.mean_finite_time_to_first_zero = finite_sum as f64 / report.emitted_zero as f64;
    }
    if let Some(max) = report.max_time_to_first_zero {
        report.max_over_census = max as f64 / report.program_count as f64;
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// Treacherous selection.
// ---------------------------------------------------------------------------

/// Loop forever emitting ones.
pub fn always_one_program() -> ToyProgram {
    ToyProgram::new(vec![Instr::Inc(0), Instr::Emit1, Instr::Jnz(0, 1)])
        .expect("well-formed")
}

/// Emit exactly `k` ones, then a zero: count a register down through an
/// emit loop.
pub fn counter_program(k: usize) -> ToyProgram {
    let mut instructions = vec![Instr::Inc(0); k];
    let loop_start = instructions.len();
    instructions.push(Instr::Emit1);
    instructions.push(Instr::Dec(0));
    instructions.push(Instr::Jnz(0, loop_start));
    instructions.push(Instr::Emit0);
    instructions.push(Instr::Halt);
    ToyProgram::new(instructions).expect("well-formed")
}

/// First `n` output bits of a program (1s and the first 0), or fewer if it
/// halts early; runs the naive interpreter with a proportional budget.
pub fn output_prefix(program: &ToyProgram, n: u64) -> Vec<u8> {
    let code = &program.instructions;
    let mut pc = 0usize;
    let mut regs = [0u64; 2];
    let mut out = Vec::new();
    let budget = n.saturating_mul(4).saturating_add(program.len() as u64 * 4 + 64);
    for _ in 0..budget {
        if out.len() as u64 >= n {
            break;
        }
        if pc >= code.len() {
            break;
        }
        match code[pc] {
            Instr::Emit1 => {
                out.push(1);
                pc += 1;
            }
            Instr::Emit0 => {
                out.push(0);
                pc += 1;
            }
            Instr::Halt => break,
            Instr::Inc(r) => {
                regs[r as usize] += 1;
                pc += 1;
            }
            Instr::Dec(r) => {
                regs[r as usize] = regs[r as usize].saturating_sub(1);
                pc += 1;
            }
            Instr::Jnz(r, target) => {
                if regs[r as usize] != 0 {
                    pc = target;
                } else {
                    pc += 1;
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SelectionReport {
    pub training_observations: u64,
    /// Indices (into the population) that passed all training observations.
    pub survivors: Vec<usize>,
    /// Index of the planted program in the population, if any.
    pub planted_index: Option<usize>,
    pub planted_survived_training: bool,
    /// Population indices that emit a zero at observation N+1.
    pub deployment_failures: Vec<usize>,
    /// Would training on N+1 observations have caught the plant?
    pub extended_training_catches_plant: bool,
}

/// Select programs by "first N outputs are all ones", then expose the
/// deployment behavior at observation N+1. The seed shuffles evaluation
/// order only; results are order-independent.
pub fn treacherous_search(
    training_inputs: u64,
    population: &[ToyProgram],
    planted_index: Option<usize>,
    seed: u64,
) -> SelectionReport {
    let n = training_inputs;
    let mut order: Vec<usize> = (0..population.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    let mut survivors = Vec::new();
    let mut deployment_failures = Vec::new();
    for &idx in &order {
        let prefix = output_prefix(&population[idx], n + 1);
        let passes_training =
            prefix.len() as u64 >= n && prefix.iter().take(n as usize).all(|&b| b == 1);
        if passes_training {
            survivors.push(idx);
            if prefix.get(n as usize) == Some(&0) {
                deployment_failures.push(idx);
            }
        }
    }
    survivors.sort_unstable();
    deployment_failures.sort_unstable();
    let planted_survived_training =
        planted_index.is_some_and(|i| survivors.contains(&i));
    let extended_training_catches_plant = planted_index.is_some_and(|i| {
        let prefix = output_prefix(&population[i], n + 1);
        !(prefix.len() as u64 > n && prefix.iter().all(|&b| b == 1))
    });
    SelectionReport {
        training_observations: n,
        survivors,
        planted_index,
        planted_survived_training,
        deployment_failures,
        extended_training_catches_plant,
    }
}

/// Honest always-one programs plus, optionally, a plant that defects after
/// exactly `defect_after` ones.
pub fn standard_population(defect_after: Option<usize>) -> (Vec<ToyProgram>, Option<usize>) {
    let mut population = vec![
        always_one_program(),
        ToyProgram::new(vec![Instr::Inc(1), Instr::Emit1, Instr::Jnz(1, 1)]).unwrap(),
        ToyProgram::new(vec![
            Instr::Inc(0),
            Instr::Inc(0),
            Instr::Emit1,
            Instr::Jnz(0, 2),
        ])
        .unwrap(),
    ];
    let planted_index = defect_after.map(|k| {
        population.push(counter_program(k));
        population.len() - 1
    });
    (population, planted_index)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn immediate_zero() {
        let p = ToyProgram::new(vec![Instr::Emit0]).unwrap();
        assert_eq!(
            time_to_first_zero(&p, 100),
            RunOutcome::EmittedZero { ones_before: 0 }
        );
    }

    #[test]
    fn one_then_zero() {
        let p = ToyProgram::new(vec![Instr::Emit1, Instr::Emit0]).unwrap();
        assert_eq!(
            time_to_first_zero(&p, 100),
            RunOutcome::EmittedZero { ones_before: 1 }
        );
    }

    #[test]
    fn countdown_loops_emit_exactly_k_ones() {
        for k in [1usize, 2, 5, 17, 50] {
            let p = counter_program(k);
            assert_eq!(
                time_to_first_zero(&p, 10_000),
                RunOutcome::EmittedZero {
                    ones_before: k as u64
                },
                "k = {k}"
            );
            assert_eq!(naive_time_to_first_zero(&p, 10_000), Some(k as u64));
        }
    }

    #[test]
    fn always_one_is_proven_never_zero() {
        let p = always_one_program();
        assert!(matches!(
            time_to_first_zero(&p, 10_000),
            RunOutcome::ProvenNeverZero { .. }
        ));
    }

    #[test]
    fn determinism_of_simulation() {
        for p in enumerate_programs(2).unwrap() {
            assert_eq!(
                time_to_first_zero(&p, 500),
                time_to_first_zero(&p, 500)
            );
        }
    }

    #[test]
    fn enumeration_counts_match_formula() {
        for len in 0..=3usize {
            let programs = enumerate_programs(len).unwrap();
            if len == 0 {
                assert!(programs.is_empty());
            } else {
                assert_eq!(programs.len() as u64, program_count(len));
            }
            for p in &programs {
                p.validate().unwrap();
            }
        }
        assert_eq!(program_count(1), 9);
        assert_eq!(program_count(2), 121);
        assert_eq!(program_count(3), 2197);
    }

    #[test]
    fn length_cap_is_enforced() {
        assert!(enumerate_programs(5).is_err());
    }

    #[test]
    fn census_small_lengths_have_no_censored_programs() {
        for len in [1usize, 2, 3] {
            let report = bb_report(len, 1000).unwrap();
            assert_eq!(report.censored, 0, "length {len}");
        }
    }

    #[test]
    fn census_max_is_nondecreasing_and_witnessed() {
        let mut last = None;
        for len in [1usize, 2, 3] {
            let report = bb_report(len, 1000).unwrap();
            let max = report.max_time_to_first_zero.expect("a zero emitter exists");
            if let Some(prev) = last {
                assert!(max >= prev);
            }
            last = Some(max);
            // Witness recheck through the naive interpreter.
            let witness = report.witness.expect("witness attached");
            assert_eq!(naive_time_to_first_zero(&witness, 100_000), Some(max));
        }
    }

    #[test]
    fn census_stable_under_budget_doubling() {
        let a = bb_report(3, 1000).unwrap();
        assert_eq!(a.censored, 0);
        let b = bb_report(3, 2000).unwrap();
        assert_eq!(a.max_time_to_first_zero, b.max_time_to_first_zero);
        assert_eq!(a.emitted_zero, b.emitted_zero);
    }

    #[test]
    fn no_finite_tag_ever_hit_the_budget() {
        // Censoring soundness: rerun every zero emitter with the naive
        // interpreter and confirm the zero arrives within the budget.
        let budget = 1000u64;
        for p in enumerate_programs(3).unwrap() {
            if let RunOutcome::EmittedZero { ones_before } = time_to_first_zero(&p, budget) {
                assert_eq!(naive_time_to_first_zero(&p, budget * 4), Some(ones_before));
            }
        }
    }

    #[test]
    fn plant_survives_training_and_defects_at_n_plus_one() {
        let (population, planted) = standard_population(Some(100));
        let report = treacherous_search(100, &population, planted, 7);
        assert!(report.planted_survived_training);
        assert_eq!(report.deployment_failures, vec![planted.unwrap()]);
        assert!(report.extended_training_catches_plant);
    }

    #[test]
    fn clean_population_survives_deployment() {
        let (population, planted) = standard_population(None);
        let report = treacherous_search(100, &population, planted, 7);
        assert_eq!(report.survivors.len(), population.len());
        assert!(report.deployment_failures.is_empty());
        assert!(!report.planted_survived_training);
    }

    #[test]
    fn seed_does_not_change_selection() {
        let (population, planted) = standard_population(Some(50));
        let a = treacherous_search(50, &population, planted, 1);
        let b = treacherous_search(50, &population, planted, 99);
        assert_eq!(a.survivors, b.survivors);
        assert_eq!(a.deployment_failures, b.deployment_failures);
    }
}
