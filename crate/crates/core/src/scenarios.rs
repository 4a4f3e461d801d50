//! Canned end-to-end experiments: the CNOT measurement, EPR, measurement
//! undo, CHSH correlations and the billiard-ball mixing transform.
//!
//! Every measurement here is a CNOT onto a record qubit; nothing collapses.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::branching::{foliate, make_pvm, relative_expectation, relative_recombine, relative_variance, Outcome};
use crate::error::{Error, Result};
use crate::network::{apply_gate, expectation, init_network, phenomenal_state, variance, GateSpec, Network};
use crate::noumenal::{project_noumenal, verify_no_action, verify_separability, NoumenalState};
use crate::operator::{Axis, Operator, Tolerance, C64};
use crate::oracle::{conditional_expectation, pauli_expectation, separability_gap, sv_expectation, sv_run, StateVector};

/// One numeric comparison.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub label: String,
    pub expected: f64,
    pub actual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    pub fn new(label: impl Into<String>, expected: f64, actual: f64, tolerance: f64) -> Self {
        let pass = (expected - actual).abs() <= tolerance;
        Check { label: label.into(), expected, actual, tolerance, pass }
    }

    /// A yes/no fact recorded as `1 = expected`.
    pub fn flag(label: impl Into<String>, holds: bool) -> Self {
        Check::new(label, 1.0, if holds { 1.0 } else { 0.0 }, 0.0)
    }
}

pub type Table = Vec<Vec<f64>>;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub pass: bool,
    pub n_checks: usize,
    pub n_failed: usize,
}

/// Checks and numeric tables produced by one scenario.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScenarioReport {
    pub name: String,
    pub checks: Vec<Check>,
    pub artifacts: BTreeMap<String, Table>,
    pub summary: Summary,
}

impl ScenarioReport {
    fn new(name: &str) -> Self {
        ScenarioReport {
            name: name.into(),
            checks: Vec::new(),
            artifacts: BTreeMap::new(),
            summary: Summary { pass: true, n_checks: 0, n_failed: 0 },
        }
    }

    fn push(&mut self, check: Check) {
        self.summary.n_checks += 1;
        if !check.pass {
            self.summary.n_failed += 1;
            self.summary.pass = false;
        }
        self.checks.push(check);
    }

    fn table(&mut self, key: &str, rows: Table) {
        self.artifacts.insert(key.into(), rows);
    }

    pub fn pass(&self) -> bool {
        self.summary.pass
    }

    pub fn failed(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    /// First check whose label starts with `prefix`.
    pub fn check(&self, prefix: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.label.starts_with(prefix))
    }
}

const EXACT: f64 = 1e-10;
const REMOTE: f64 = 1e-12;

fn run(gates: &[GateSpec], net: Network) -> Result<Network> {
    gates.iter().try_fold(net, |acc, g| apply_gate(&acc, g))
}

fn bloch_checks(report: &mut ScenarioReport, tag: &str, net: &Network, qubit: usize, want: [f64; 3]) -> Result<Vec<f64>> {
    let got = phenomenal_state(net, qubit)?.bloch;
    for axis in Axis::ALL {
        let k = axis.index();
        report.push(Check::new(format!("{tag} <q_{qubit}{axis}>"), want[k], got[k], EXACT));
    }
    Ok(got.to_vec())
}

fn product(net: &Network, factors: &[(usize, Axis)]) -> Result<Operator> {
    let mut acc = net.unit();
    for &(q, axis) in factors {
        acc = &acc * net.descriptor(q, axis)?;
    }
    Ok(acc)
}

/// Qubit 2 is put in `|+⟩` and measured by qubit 1 through `CNOT(2 → 1)`.
pub fn run_measurement() -> ScenarioReport {
    measurement().expect("fixed measurement scenario")
}

fn measurement() -> Result<ScenarioReport> {
    let tol = Tolerance::default();
    let (a, b) = (1, 2);
    let mut report = ScenarioReport::new("measurement");

    let pre = apply_gate(&init_network(2, None, tol)?, &GateSpec::hadamard(b))?;
    let pre_a = bloch_checks(&mut report, "pre", &pre, a, [0.0, 0.0, 1.0])?;
    let pre_b = bloch_checks(&mut report, "pre", &pre, b, [1.0, 0.0, 0.0])?;

    let post = apply_gate(&pre, &GateSpec::cnot(b, a))?;
    let post_a = bloch_checks(&mut report, "post", &post, a, [0.0; 3])?;
    let post_b = bloch_checks(&mut report, "post", &post, b, [0.0; 3])?;
    report.table("pre", vec![pre_a, pre_b]);
    report.table("post", vec![post_a, post_b]);

    let qaz = post.descriptor(a, Axis::Z)?;
    report.push(Check::new(format!("absolute Var(q_{a}z)"), 1.0, variance(&post, qaz)?, EXACT));

    let psi = sv_run(&StateVector::zero(2), &[GateSpec::hadamard(b), GateSpec::cnot(b, a)], tol)?;
    let z_a = fixed_pauli(Axis::Z, a, 2)?;
    let z_b = fixed_pauli(Axis::Z, b, 2)?;
    let pvm = make_pvm(&post, b)?;
    let (plus, minus) = foliate(&post, a, &pvm)?;
    let mut rel_rows = Vec::new();
    let mut weights = Vec::new();
    for branch in [&plus, &minus] {
        let theta = branch.label();
        let bloch: Vec<f64> =
            Axis::ALL.iter().map(|&ax| relative_expectation(branch, ax, tol)).collect::<Result<_>>()?;
        let want = [0.0, 0.0, theta.value()];
        for axis in Axis::ALL {
            report.push(Check::new(
                format!("branch {theta} <q_{a}{axis}>"),
                want[axis.index()],
                bloch[axis.index()],
                EXACT,
            ));
        }
        report.push(Check::new(format!("branch {theta} Var(q_{a}z)"), 0.0, relative_variance(branch, Axis::Z, tol)?, EXACT));

        let proj = oracle_projector(&z_b, theta);
        let oracle_weight = sv_expectation(&psi, &proj, tol)?;
        report.push(Check::new(format!("branch {theta} weight"), oracle_weight, branch.weight(), EXACT));
        report.push(Check::new(format!("branch {theta} weight = 1/2"), 0.5, branch.weight(), EXACT));
        let cond = conditional_expectation(&psi, &proj, &z_a, tol)?;
        report.push(Check::new(format!("branch {theta} <q_{a}z> vs oracle"), cond, bloch[2], EXACT));
        report.push(Check::new(format!("branch {theta} Pauli algebra"), 0.0, branch.pauli_deviation(), EXACT));
        rel_rows.push(bloch);
        weights.push(vec![theta.value(), branch.weight()]);
    }
    report.table("relative", rel_rows);
    report.table("weights", weights);

    let recombined = relative_recombine(&plus, &minus, tol)?;
    let absolute = project_noumenal(&NoumenalState::of_network(&post), &[a])?;
    let gap = recombined.max_dist(&absolute).expect("same qubit");
    report.push(Check::new("relative triples sum to absolute", 0.0, gap, EXACT));
    Ok(report)
}

/// `σ_axis` on `qubit` as a fixed t = 0 matrix.
fn fixed_pauli(axis: Axis, qubit: usize, n: usize) -> Result<Operator> {
    Operator::embed(&Operator::pauli(axis), qubit, n)
}

/// `½(1 ± Z)` as a fixed Schrödinger-picture matrix.
fn oracle_projector(z: &Operator, theta: Outcome) -> Operator {
    let unit = Operator::identity(z.dim());
    let half = C64::new(0.5, 0.0);
    match theta {
        Outcome::Plus => (&unit + z).scale(half),
        Outcome::Minus => (&unit - z).scale(half),
    }
}

/// Alice (1) and Bob (2) share a Bell pair; Alice measures onto ancilla 3.
pub fn run_epr() -> ScenarioReport {
    epr().expect("fixed EPR scenario")
}

fn epr() -> Result<ScenarioReport> {
    let tol = Tolerance::default();
    let (alice, bob, anc) = (1, 2, 3);
    let mut report = ScenarioReport::new("epr");

    let prep = [GateSpec::hadamard(alice), GateSpec::cnot(alice, bob)];
    let bell = run(&prep, init_network(3, None, tol)?)?;
    let measure = GateSpec::cnot(alice, anc);
    let remote = verify_no_action(&bell, &measure, &[bob])?;
    report.push(Check::new("Bob triple moved by Alice's measurement", 0.0, remote, REMOTE));
    let after = apply_gate(&bell, &measure)?;

    let zz = product(&after, &[(alice, Axis::Z), (bob, Axis::Z)])?;
    let corr = expectation(&after, &zz)?;
    report.push(Check::new("<q_Az q_Bz>", 1.0, corr, EXACT));

    let mut gates = prep.to_vec();
    gates.push(measure);
    let psi = sv_run(&StateVector::zero(3), &gates, tol)?;
    report.push(Check::new("<q_Az q_Bz> vs oracle", pauli_expectation(&psi, &[(alice, Axis::Z), (bob, Axis::Z)]), corr, EXACT));

    let pvm = make_pvm(&after, anc)?;
    let (plus, minus) = foliate(&after, bob, &pvm)?;
    let z_anc = fixed_pauli(Axis::Z, anc, 3)?;
    let z_bob = fixed_pauli(Axis::Z, bob, 3)?;
    let mut rows = Vec::new();
    for branch in [&plus, &minus] {
        let theta = branch.label();
        let rel = relative_expectation(branch, Axis::Z, tol)?;
        report.push(Check::new(format!("Bob <q_Bz> given Alice {theta}"), theta.value(), rel, EXACT));
        let cond = conditional_expectation(&psi, &oracle_projector(&z_anc, theta), &z_bob, tol)?;
        report.push(Check::new(format!("Bob <q_Bz> given Alice {theta} vs oracle"), cond, rel, EXACT));
        rows.push(vec![theta.value(), branch.weight(), rel]);
    }
    report.table("matching", rows);

    let gap = separability_gap(&StateVector::bell(), &[1])?;
    report.push(Check::new("Bell density-matrix separability gap", 3f64.sqrt() / 2.0, gap, EXACT));
    for partition in [vec![vec![alice], vec![bob, anc]], vec![vec![alice], vec![bob], vec![anc]]] {
        report.push(Check::flag(format!("descriptors separable over {partition:?}"), verify_separability(&after, &partition)?));
    }

    let flipped = sv_run(&StateVector::zero(2), &[GateSpec::pauli(1, Axis::X), GateSpec::pauli(2, Axis::X)], tol)?;
    let overlap = flipped.inner(&StateVector::product("11")?).norm();
    report.push(Check::new("|<11|X⊗X|00>|", 1.0, overlap, EXACT));
    report.table("separability_gap", vec![vec![gap]]);
    Ok(report)
}

/// Bob (2) measures his half of a Bell pair onto ancilla 3, then undoes it.
pub fn run_undo() -> ScenarioReport {
    undo().expect("fixed undo scenario")
}

fn undo() -> Result<ScenarioReport> {
    let tol = Tolerance::default();
    let (alice, bob, anc) = (1, 2, 3);
    let mut report = ScenarioReport::new("undo");

    let start = run(&[GateSpec::hadamard(alice), GateSpec::cnot(alice, bob)], init_network(3, None, tol)?)?;
    let measure = GateSpec::cnot(bob, anc);
    let alice_ref = project_noumenal(&NoumenalState::of_network(&start), &[alice])?;

    let mut nets = vec![start];
    for _ in 0..2 {
        let next = apply_gate(nets.last().expect("non-empty"), &measure)?;
        nets.push(next);
    }
    let mut var_rows = Vec::new();
    for (step, net) in nets.iter().enumerate() {
        let alice_now = project_noumenal(&NoumenalState::of_network(net), &[alice])?;
        let d = alice_now.max_dist(&alice_ref).expect("same qubit");
        report.push(Check::new(format!("Alice noumenal state drift at step {step}"), 0.0, d, REMOTE));
        let v = variance(net, net.descriptor(anc, Axis::Z)?)?;
        var_rows.push(vec![step as f64, v]);
    }
    let want_var = [0.0, 1.0, 0.0];
    for (row, want) in var_rows.iter().zip(want_var) {
        report.push(Check::new(format!("Var(q_{anc}z) at step {}", row[0]), want, row[1], EXACT));
    }
    let restored = nets[0]
        .triples()
        .iter()
        .zip(nets[2].triples())
        .map(|(x, y)| x.max_dist(y))
        .fold(0.0, f64::max);
    report.push(Check::new("descriptors restored after undo", 0.0, restored, REMOTE));
    report.table("ancilla_variance", var_rows);
    Ok(report)
}

/// `E(α, β)` on the Bell pair and the CHSH combination.
pub fn run_chsh() -> ScenarioReport {
    chsh().expect("fixed CHSH scenario")
}

fn chsh() -> Result<ScenarioReport> {
    let tol = Tolerance::default();
    let (alice, bob) = (1, 2);
    let mut report = ScenarioReport::new("chsh");
    let bell = run(&[GateSpec::hadamard(alice), GateSpec::cnot(alice, bob)], init_network(2, None, tol)?)?;
    let psi = StateVector::bell();

    let setting = |net: &Network, q: usize, angle: f64| -> Result<Operator> {
        let z = net.descriptor(q, Axis::Z)?.scale(C64::new(angle.cos(), 0.0));
        let x = net.descriptor(q, Axis::X)?.scale(C64::new(angle.sin(), 0.0));
        Ok(&z + &x)
    };
    let oracle_e = |alpha: f64, beta: f64| -> f64 {
        let mut e = 0.0;
        for (ca, ax) in [(alpha.cos(), Axis::Z), (alpha.sin(), Axis::X)] {
            for (cb, bx) in [(beta.cos(), Axis::Z), (beta.sin(), Axis::X)] {
                e += ca * cb * pauli_expectation(&psi, &[(alice, ax), (bob, bx)]);
            }
        }
        e
    };

    let settings = [(0.0, FRAC_PI_4, 1.0), (0.0, -FRAC_PI_4, 1.0), (FRAC_PI_2, FRAC_PI_4, 1.0), (FRAC_PI_2, -FRAC_PI_4, -1.0)];
    let mut s = 0.0;
    let mut rows = Vec::new();
    for (alpha, beta, sign) in settings {
        let obs = &setting(&bell, alice, alpha)? * &setting(&bell, bob, beta)?;
        let e = expectation(&bell, &obs)?;
        let label = format!("E({alpha:.4},{beta:.4})");
        report.push(Check::new(format!("{label} excess over 1"), 0.0, (e.abs() - 1.0).max(0.0), REMOTE));
        report.push(Check::new(format!("{label} vs oracle"), oracle_e(alpha, beta), e, EXACT));
        report.push(Check::new(format!("{label} = cos(α-β)"), (alpha - beta).cos(), e, EXACT));

        // Same correlation with the settings realized as local rotations.
        let rotated = run(
            &[GateSpec::rotation(alice, Axis::Y, -alpha), GateSpec::rotation(bob, Axis::Y, -beta)],
            bell.clone(),
        )?;
        let e_rot = expectation(&rotated, &product(&rotated, &[(alice, Axis::Z), (bob, Axis::Z)])?)?;
        report.push(Check::new(format!("{label} via rotated descriptors"), e, e_rot, EXACT));
        s += sign * e;
        rows.push(vec![alpha, beta, e]);
    }
    report.push(Check::new("S", 2.0 * 2f64.sqrt(), s, 1e-9));

    for beta in [FRAC_PI_4, -FRAC_PI_4] {
        let d = verify_no_action(&bell, &GateSpec::rotation(bob, Axis::Y, -beta), &[alice])?;
        report.push(Check::new(format!("Alice triple moved by Bob's setting {beta:.4}"), 0.0, d, REMOTE));
    }
    report.table("correlations", rows);
    report.table("S", vec![vec![s]]);
    Ok(report)
}

/// Ball positions and the invertible matrix mixing them into a primed description.
#[derive(Clone, Debug, PartialEq)]
pub struct BilliardSystem {
    x: DVector<f64>,
    v: DMatrix<f64>,
}

impl BilliardSystem {
    pub fn new(x: Vec<f64>, v: DMatrix<f64>, tol: Tolerance) -> Result<Self> {
        let n = x.len();
        if n == 0 || v.nrows() != n || v.ncols() != n {
            return Err(Error::InvalidArg(format!(
                "{n} positions need a {n}x{n} mixing matrix, got {}x{}",
                v.nrows(),
                v.ncols()
            )));
        }
        let det = v.determinant();
        if det.abs() <= tol.eps() {
            return Err(Error::InvalidArg(format!("mixing matrix is singular (det = {det:e})")));
        }
        Ok(BilliardSystem { x: DVector::from_vec(x), v })
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    /// `x'_j = Σ_k V_jk x_k`.
    pub fn primed(&self) -> DVector<f64> {
        &self.v * &self.x
    }
}

/// Moves ball `k` (1-based) by `delta` and reports how the primed description responds.
pub fn run_billiard(system: &BilliardSystem, k: usize, delta: f64) -> Result<ScenarioReport> {
    let n = system.n();
    if k == 0 || k > n {
        return Err(Error::InvalidArg(format!("ball {k} outside 1..={n}")));
    }
    let mut report = ScenarioReport::new("billiard");
    let before = system.primed();
    let mut moved = system.x.clone();
    moved[k - 1] += delta;
    let after = &system.v * &moved;
    let dx = &after - &before;

    let mut nonlocal = Vec::new();
    for j in 0..n {
        let want = system.v[(j, k - 1)] * delta;
        report.push(Check::new(format!("dx'_{}", j + 1), want, dx[j], REMOTE));
        if j != k - 1 {
            report.push(Check::new(format!("ball {} untouched", j + 1), system.x[j], moved[j], 0.0));
            if system.v[(j, k - 1)] != 0.0 {
                nonlocal.push(vec![(j + 1) as f64, dx[j]]);
            }
        }
    }
    let inv = system.v.clone().try_inverse().ok_or_else(|| Error::InvalidArg("mixing matrix is singular".into()))?;
    let back = &inv * &before;
    let round_trip = (&back - &system.x).amax();
    report.push(Check::new("V^-1 V x = x", 0.0, round_trip, REMOTE));

    report.table("dx_primed", dx.iter().map(|d| vec![*d]).collect());
    report.table("nonlocal", nonlocal);
    Ok(report)
}

/// `V = [[1, 1], [0, 1]]`, ball 2 moved by 1.
pub fn run_billiard_demo() -> ScenarioReport {
    let v = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]);
    let system = BilliardSystem::new(vec![0.5, 2.0], v, Tolerance::default()).expect("invertible");
    run_billiard(&system, 2, 1.0).expect("ball in range")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_passes(report: &ScenarioReport) {
        let failed: Vec<_> = report.failed().collect();
        assert!(failed.is_empty(), "{}: {failed:#?}", report.name);
    }

    #[test]
    fn every_scenario_passes() {
        for report in [run_measurement(), run_epr(), run_undo(), run_chsh(), run_billiard_demo()] {
            assert_passes(&report);
            assert_eq!(report.summary.n_checks, report.checks.len());
        }
    }

    #[test]
    fn measurement_tables() {
        let r = run_measurement();
        let want = [[0.0, 0.0, 1.0], [1.0, 0.0, 0.0]];
        for (row, w) in r.artifacts["pre"].iter().zip(want) {
            for (a, b) in row.iter().zip(w) {
                assert!((a - b).abs() < 1e-12);
            }
        }
        assert!((r.artifacts["weights"][0][1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn chsh_value() {
        let r = run_chsh();
        assert!((r.artifacts["S"][0][0] - 2.0 * 2f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn billiard_identity_is_local() {
        let system = BilliardSystem::new(vec![1.0, -3.0, 2.5], DMatrix::identity(3, 3), Tolerance::default()).unwrap();
        let r = run_billiard(&system, 1, 0.25).unwrap();
        assert_passes(&r);
        assert!(r.artifacts["nonlocal"].is_empty());
    }

    #[test]
    fn billiard_cross_dependence() {
        let r = run_billiard_demo();
        assert_eq!(r.check("dx'_1").unwrap().actual, 1.0);
        assert_eq!(r.artifacts["nonlocal"], vec![vec![1.0, 1.0]]);
    }

    #[test]
    fn billiard_rejects_singular_and_bad_moves() {
        let singular = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        assert!(matches!(
            BilliardSystem::new(vec![0.0, 0.0], singular, Tolerance::default()),
            Err(Error::InvalidArg(_))
        ));
        let ok = BilliardSystem::new(vec![0.0], DMatrix::identity(1, 1), Tolerance::default()).unwrap();
        assert!(matches!(run_billiard(&ok, 2, 1.0), Err(Error::InvalidArg(_))));
    }

    #[test]
    fn failing_check_is_reported() {
        let mut r = ScenarioReport::new("x");
        r.push(Check::new("ok", 1.0, 1.0, 0.0));
        r.push(Check::new("off", 1.0, 1.5, 0.1));
        assert!(!r.pass());
        assert_eq!(r.summary.n_failed, 1);
        assert_eq!(r.failed().next().unwrap().label, "off");
    }
}
