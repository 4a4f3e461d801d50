use std::collections::BTreeMap;

use serde::Serialize;

use super::parse::{CircuitProgram, Directive};
use crate::branching::{foliate, make_pvm, relative_bloch, relative_recombine, relative_variance, Outcome, Pvm};
use crate::error::{Error, Result};
use crate::network::{apply_gate, init_network, phenomenal_state, variance, Network};
use crate::noumenal::{project_noumenal, separability_deviation, NoumenalState};
use crate::operator::{Axis, Operator, Tolerance, C64, ONE};
use crate::oracle::{conditional_expectation, pauli_expectation, sv_step, StateVector};
use crate::scenarios::{Check, Summary};

/// Run-time switches for [`execute`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExecOptions {
    pub tol: Tolerance,
    /// Co-simulate in the Schrödinger picture and compare.
    pub oracle: bool,
    /// Run the invariant suite after every step.
    pub suite: bool,
}

impl Default for ExecOptions {
    fn default() -> Self {
        ExecOptions { tol: Tolerance::default(), oracle: true, suite: true }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QubitState {
    pub qubit: usize,
    pub bloch: [f64; 3],
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SuiteEntry {
    pub value: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StepReport {
    pub t: usize,
    /// Source line; absent for the initial state.
    pub line: Option<usize>,
    pub directive: String,
    pub phenomenal: Vec<QubitState>,
    pub suite: BTreeMap<&'static str, SuiteEntry>,
    pub checks: Vec<Check>,
}

/// One relative branch of an active foliation, evaluated at time `t`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BranchRecord {
    pub t: usize,
    pub line: usize,
    pub qubit: usize,
    pub on: usize,
    pub t0: usize,
    pub label: Outcome,
    /// False once a later gate stops the projector commuting with the qubit.
    pub valid: bool,
    pub weight: Option<f64>,
    pub bloch: Option<[f64; 3]>,
    pub variance_z: Option<f64>,
}

/// Everything one execution produced.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunReport {
    pub program: String,
    pub tolerance: f64,
    pub steps: Vec<StepReport>,
    pub branches: Vec<BranchRecord>,
    pub summary: Summary,
}

impl RunReport {
    pub fn pass(&self) -> bool {
        self.summary.pass
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        super::to_canonical_json(self)
    }

    /// Human-readable rendering of the report.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for step in &self.steps {
            let line = step.line.map(|l| format!("line {l}")).unwrap_or_else(|| "start".into());
            out.push_str(&format!("t={} [{line}] {}\n", step.t, step.directive));
            for q in &step.phenomenal {
                let [x, y, z] = q.bloch;
                out.push_str(&format!("    q{}: ({x:+.6}, {y:+.6}, {z:+.6})\n", q.qubit));
            }
            for (name, e) in &step.suite {
                if !e.pass {
                    out.push_str(&format!("    FAIL suite {name}: {:e}\n", e.value));
                }
            }
            for c in &step.checks {
                let tag = if c.pass { "ok  " } else { "FAIL" };
                out.push_str(&format!("    {tag} {}: expected {} got {}\n", c.label, c.expected, c.actual));
            }
        }
        for b in &self.branches {
            match (b.valid, b.bloch, b.weight) {
                (true, Some([x, y, z]), Some(w)) => out.push_str(&format!(
                    "branch t={} q{} on q{} {}: weight {w:.6}, ({x:+.6}, {y:+.6}, {z:+.6})\n",
                    b.t, b.qubit, b.on, b.label
                )),
                _ => out.push_str(&format!("branch t={} q{} on q{} {}: foliation no longer valid\n", b.t, b.qubit, b.on, b.label)),
            }
        }
        let s = &self.summary;
        out.push_str(&format!(
            "{}: {} checks, {} failed\n",
            if s.pass { "PASS" } else { "FAIL" },
            s.n_checks,
            s.n_failed
        ));
        out
    }
}

struct Foliation {
    line: usize,
    qubit: usize,
    on: usize,
    t0: usize,
    pvm: Pvm,
}

struct Runner {
    opts: ExecOptions,
    psi0: StateVector,
    net: Network,
    psi: StateVector,
    active: Vec<Foliation>,
    branches: Vec<BranchRecord>,
    steps: Vec<StepReport>,
}

fn entry(value: f64, tol: Tolerance) -> SuiteEntry {
    SuiteEntry { value, pass: tol.accepts(value) }
}

impl Runner {
    fn snapshot(&self, line: Option<usize>, directive: String, remote_moved: Option<f64>) -> Result<StepReport> {
        let net = &self.net;
        let tol = self.opts.tol;
        let phenomenal = (1..=net.n())
            .map(|q| Ok(QubitState { qubit: q, bloch: phenomenal_state(net, q)?.bloch }))
            .collect::<Result<_>>()?;
        let mut suite = BTreeMap::new();
        if self.opts.suite {
            let inv = net.check_invariants();
            suite.insert("pauli", entry(inv.pauli, tol));
            suite.insert("commutation", entry(inv.commutation, tol));
            suite.insert("hermiticity", entry(inv.hermiticity, tol));
            suite.insert("tracelessness", entry(inv.tracelessness, tol));
            if let Some(d) = remote_moved {
                suite.insert("no_action", entry(d, tol));
            }
            let singletons: Vec<Vec<usize>> = (1..=net.n()).map(|q| vec![q]).collect();
            let sep = match separability_deviation(net, &singletons) {
                Ok(d) => d,
                Err(Error::Incompatible(_)) => f64::INFINITY,
                Err(e) => return Err(e),
            };
            suite.insert("separability", entry(sep, tol));
            if self.opts.oracle {
                suite.insert("oracle_equivalence", entry(self.oracle_gap()?, tol));
            }
        }
        Ok(StepReport { t: net.t(), line, directive, phenomenal, suite, checks: Vec::new() })
    }

    /// Largest gap between descriptor and state-vector values of every
    /// single-qubit and two-qubit Pauli expectation.
    fn oracle_gap(&self) -> Result<f64> {
        let n = self.net.n();
        let psi0 = self.psi0.amps();
        let mut vecs = Vec::with_capacity(3 * n);
        for q in 1..=n {
            for axis in Axis::ALL {
                vecs.push(self.net.descriptor(q, axis)?.apply(psi0)?);
            }
        }
        let inner = |a: &[C64], b: &[C64]| a.iter().zip(b).map(|(x, y)| x.conj() * y).sum::<C64>().re;
        let mut worst: f64 = 0.0;
        for i in 1..=n {
            for a in Axis::ALL {
                let vi = &vecs[3 * (i - 1) + a.index()];
                let heis = inner(psi0, vi);
                worst = worst.max((heis - pauli_expectation(&self.psi, &[(i, a)])).abs());
                for j in i + 1..=n {
                    for b in Axis::ALL {
                        let heis = inner(vi, &vecs[3 * (j - 1) + b.index()]);
                        let schr = pauli_expectation(&self.psi, &[(i, a), (j, b)]);
                        worst = worst.max((heis - schr).abs());
                    }
                }
            }
        }
        Ok(worst)
    }

    /// Re-foliates every active foliation at the current time.
    fn evaluate_foliations(&mut self, report: &mut StepReport, fresh: bool) -> Result<()> {
        let tol = self.opts.tol;
        let t = self.net.t();
        let mut still_active = Vec::new();
        for f in std::mem::take(&mut self.active) {
            let (plus, minus) = match foliate(&self.net, f.qubit, &f.pvm) {
                Ok(pair) => pair,
                Err(Error::NonCommutingFoliation { .. }) => {
                    for label in Outcome::ALL {
                        self.branches.push(BranchRecord {
                            t,
                            line: f.line,
                            qubit: f.qubit,
                            on: f.on,
                            t0: f.t0,
                            label,
                            valid: false,
                            weight: None,
                            bloch: None,
                            variance_z: None,
                        });
                    }
                    continue;
                }
                Err(e) => return Err(e.at_line(f.line)),
            };
            let absolute = project_noumenal(&NoumenalState::of_network(&self.net), &[f.qubit])?;
            let recombined = relative_recombine(&plus, &minus, tol)?;
            let gap = recombined.max_dist(&absolute).expect("same qubit");
            let q = f.qubit;
            if self.opts.suite {
                report.checks.push(Check::new(format!("q{q} on q{} relative triples sum to absolute", f.on), 0.0, gap, tol.eps()));
            }
            for branch in [&plus, &minus] {
                let label = branch.label();
                let bloch = relative_bloch(branch, tol)?;
                let var_z = relative_variance(branch, Axis::Z, tol)?;
                if self.opts.suite {
                    report.checks.push(Check::new(
                        format!("q{q} branch {label} relative Pauli algebra"),
                        0.0,
                        branch.pauli_deviation(),
                        tol.eps(),
                    ));
                }
                if self.opts.oracle && fresh {
                    let n = self.net.n();
                    let z_on = Operator::embed(&Operator::pauli(Axis::Z), f.on, n)?;
                    let unit = Operator::identity(z_on.dim());
                    let proj = (&unit + &z_on.scale(C64::new(label.value(), 0.0))).scale(ONE * 0.5);
                    for axis in Axis::ALL {
                        let obs = Operator::embed(&Operator::pauli(axis), q, n)?;
                        let cond = conditional_expectation(&self.psi, &proj, &obs, tol).map_err(|e| e.at_line(f.line))?;
                        report.checks.push(Check::new(
                            format!("q{q} branch {label} <q{q}{axis}> vs oracle"),
                            cond,
                            bloch[axis.index()],
                            tol.eps(),
                        ));
                    }
                }
                self.branches.push(BranchRecord {
                    t,
                    line: f.line,
                    qubit: q,
                    on: f.on,
                    t0: f.t0,
                    label,
                    valid: true,
                    weight: Some(branch.weight()),
                    bloch: Some(bloch),
                    variance_z: Some(var_z),
                });
            }
            still_active.push(f);
        }
        self.active = still_active;
        Ok(())
    }
}

/// Runs `program` in the descriptor picture (and, optionally, the state-vector
/// picture), recording phenomenal states, suite results and branch tables.
pub fn execute(program: &CircuitProgram, opts: ExecOptions) -> Result<RunReport> {
    let tol = opts.tol;
    let psi0 = StateVector::product(&program.init)?;
    let net = init_network(program.n, Some(psi0.amps()), tol)?;
    let mut runner = Runner {
        opts,
        psi: psi0.clone(),
        psi0,
        net,
        active: Vec::new(),
        branches: Vec::new(),
        steps: Vec::new(),
    };
    let first = runner.snapshot(None, format!("init {}", program.init), None)?;
    runner.steps.push(first);

    for step in &program.steps {
        let line = step.line;
        let d = &step.directive;
        let mut remote_moved = None;
        let mut checks = Vec::new();
        let mut fresh = false;
        if let Some(gate) = d.gate() {
            let next = apply_gate(&runner.net, &gate).map_err(|e| e.at_line(line))?;
            let support = gate.support();
            let mut moved: f64 = 0.0;
            let mut any = false;
            for q in (1..=program.n).filter(|q| !support.contains(q)) {
                moved = moved.max(next.triple(q)?.max_dist(runner.net.triple(q)?));
                any = true;
            }
            remote_moved = any.then_some(moved);
            runner.net = next;
            if opts.oracle {
                runner.psi = sv_step(&runner.psi, &gate, tol).map_err(|e| e.at_line(line))?;
            }
        } else {
            match *d {
                Directive::Foliate { qubit, on, t0 } => {
                    let pvm = make_pvm(&runner.net, on).map_err(|e| e.at_line(line))?;
                    foliate(&runner.net, qubit, &pvm).map_err(|e| e.at_line(line))?;
                    runner.active.push(Foliation { line, qubit, on, t0, pvm });
                    fresh = true;
                }
                Directive::Expect { qubit } => {
                    if opts.oracle {
                        let bloch = phenomenal_state(&runner.net, qubit)?.bloch;
                        for axis in Axis::ALL {
                            checks.push(Check::new(
                                format!("<q{qubit}{axis}> vs oracle"),
                                pauli_expectation(&runner.psi, &[(qubit, axis)]),
                                bloch[axis.index()],
                                tol.eps(),
                            ));
                        }
                    }
                }
                Directive::AssertSharp { qubit, axis, value } => {
                    let q = runner.net.descriptor(qubit, axis).map_err(|e| e.at_line(line))?;
                    let mean = crate::network::expectation(&runner.net, q)?;
                    checks.push(Check::new(format!("<q{qubit}{axis}>"), value, mean, tol.eps()));
                    checks.push(Check::new(format!("Var(q{qubit}{axis})"), 0.0, variance(&runner.net, q)?, tol.eps()));
                }
                _ => {}
            }
        }
        let mut report = runner.snapshot(Some(line), d.to_string(), remote_moved)?;
        report.checks = checks;
        runner.evaluate_foliations(&mut report, fresh)?;
        runner.steps.push(report);
    }

    let mut summary = Summary { pass: true, n_checks: 0, n_failed: 0 };
    for step in &runner.steps {
        let results = step.suite.values().map(|e| e.pass).chain(step.checks.iter().map(|c| c.pass));
        for pass in results {
            summary.n_checks += 1;
            if !pass {
                summary.n_failed += 1;
                summary.pass = false;
            }
        }
    }
    Ok(RunReport {
        program: program.to_string(),
        tolerance: tol.eps(),
        steps: runner.steps,
        branches: runner.branches,
        summary,
    })
}
