//! Jointly learned communication and control: each agent trains a message
//! table `Q[obs][message]` alongside its move table `Q[obs][message][move]`,
//! both on the shared team reward, with UCB on each decision. The message
//! for a step is chosen before the moves, and the move-table update for a
//! transition completes at the next step once the incoming message — part of
//! the successor state — is known.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::gridworld::{reset, step, GridSpec, Move};
use crate::harness::{normalize, RunRecord};
use crate::qcore::{ucb_select, AgentQTable, TrainConfig, UpdateRule, VisitCounts};
use crate::schemes::{
    evaluate_exact, phase_seed, Channel, JointPolicy, SchemeKind, SchemeOutcome, SchemeResult,
    PHASE_DISTRIBUTED,
};
use crate::Result;

/// Message-selection Q-table: one row of `2^R` message values per own
/// observation.
#[derive(Debug, Clone, PartialEq)]
pub struct MsgQ {
    cells: usize,
    messages: usize,
    q: Vec<f64>,
}

impl MsgQ {
    fn new(cells: usize, messages: usize) -> Self {
        MsgQ { cells, messages, q: vec![0.0; cells * messages] }
    }

    #[inline]
    pub fn row(&self, obs: usize) -> &[f64] {
        &self.q[obs * self.messages..(obs + 1) * self.messages]
    }

    #[inline]
    fn entry_mut(&mut self, obs: usize, msg: usize) -> &mut f64 {
        &mut self.q[obs * self.messages + msg]
    }

    fn max_row(&self, obs: usize) -> f64 {
        self.row(obs).iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn argmax_row(&self, obs: usize) -> usize {
        let row = self.row(obs);
        let mut best = 0;
        for (m, &v) in row.iter().enumerate() {
            if v > row[best] {
                best = m;
            }
        }
        best
    }
}

/// The trained bundle; greedy execution reads messages and moves straight
/// off the tables.
#[derive(Debug, Clone)]
pub struct LbicTables {
    pub comm_q1: MsgQ,
    pub comm_q2: MsgQ,
    pub move_q1: AgentQTable,
    pub move_q2: AgentQTable,
}

impl JointPolicy for LbicTables {
    fn joint_move(&self, s: crate::gridworld::JointState, _t: usize) -> (Move, Move) {
        let c1 = self.comm_q1.argmax_row(s.o1.index());
        let c2 = self.comm_q2.argmax_row(s.o2.index());
        (
            self.move_q1.argmax_row(s.o1.index(), c2),
            self.move_q2.argmax_row(s.o2.index(), c1),
        )
    }
}

/// A move-table update deferred until the successor state's incoming
/// message is known.
struct Pending {
    o1: usize,
    c2: usize,
    m1: usize,
    o2: usize,
    c1: usize,
    m2: usize,
    reward: f64,
}

pub fn train_lbic(
    spec: &GridSpec,
    cfg: &TrainConfig,
    rate_bits: u32,
    rule: UpdateRule,
) -> (LbicTables, RunRecord) {
    cfg.validate().expect("invalid TrainConfig");
    let cells = spec.cells();
    let messages = 1usize << rate_bits;
    let channel = Channel::new(rate_bits);

    let mut t1 = LbicTables {
        comm_q1: MsgQ::new(cells, messages),
        comm_q2: MsgQ::new(cells, messages),
        move_q1: AgentQTable::new(cells, messages),
        move_q2: AgentQTable::new(cells, messages),
    };
    let mut nc1 = VisitCounts::new(cells, messages);
    let mut nc2 = VisitCounts::new(cells, messages);
    let mut nm1 = VisitCounts::new(cells * messages, Move::COUNT);
    let mut nm2 = VisitCounts::new(cells * messages, Move::COUNT);

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut record = RunRecord::with_capacity(cfg.episodes);

    for episode in 0..cfg.episodes {
        let mut s = reset(&mut rng, spec);
        let mut pending: Option<Pending> = None;
        let mut ret = 0.0;
        let mut discount = 1.0;
        let mut length = 0;

        for _ in 0..cfg.horizon {
            let (o1, o2) = (s.o1.index(), s.o2.index());

            // Communication decisions for this step.
            let c1 =
                ucb_select(t1.comm_q1.row(o1), nc1.row(o1), nc1.total(o1), cfg.ucb_c, &mut rng);
            nc1.increment(o1, c1);
            let c2 =
                ucb_select(t1.comm_q2.row(o2), nc2.row(o2), nc2.total(o2), cfg.ucb_c, &mut rng);
            nc2.increment(o2, c2);
            let c1 = channel.send(c1).expect("message fits the alphabet");
            let c2 = channel.send(c2).expect("message fits the alphabet");

            // The previous transition's successor state is complete now.
            if let Some(p) = pending.take() {
                let max1 = t1.move_q1.max_row(o1, c2);
                let visits1 = nm1.row(t1.move_q1.state_index(p.o1, p.c2))[p.m1];
                rule.apply(
                    t1.move_q1.entry_mut(p.o1, p.c2, p.m1),
                    p.reward,
                    max1,
                    false,
                    cfg.gamma,
                    cfg.alpha,
                    visits1,
                );
                let max2 = t1.move_q2.max_row(o2, c1);
                let visits2 = nm2.row(t1.move_q2.state_index(p.o2, p.c1))[p.m2];
                rule.apply(
                    t1.move_q2.entry_mut(p.o2, p.c1, p.m2),
                    p.reward,
                    max2,
                    false,
                    cfg.gamma,
                    cfg.alpha,
                    visits2,
                );
            }

            // Move decisions.
            let s1 = t1.move_q1.state_index(o1, c2);
            let mut m1 =
                ucb_select(t1.move_q1.row(o1, c2), nm1.row(s1), nm1.total(s1), cfg.ucb_c, &mut rng);
            if rng.gen_bool(crate::qcore::EXPLORATION_FLOOR) {
                m1 = rng.gen_range(0..Move::COUNT);
            }
            nm1.increment(s1, m1);
            let s2 = t1.move_q2.state_index(o2, c1);
            let mut m2 =
                ucb_select(t1.move_q2.row(o2, c1), nm2.row(s2), nm2.total(s2), cfg.ucb_c, &mut rng);
            if rng.gen_bool(crate::qcore::EXPLORATION_FLOOR) {
                m2 = rng.gen_range(0..Move::COUNT);
            }
            nm2.increment(s2, m2);

            let out = step(s, Move::from_index(m1), Move::from_index(m2), spec);
            ret += discount * out.reward;
            discount *= cfg.gamma;
            length += 1;

            if out.terminal {
                let vc1 = nc1.row(o1)[c1];
                rule.apply(t1.comm_q1.entry_mut(o1, c1), out.reward, 0.0, true, cfg.gamma, cfg.alpha, vc1);
                let vc2 = nc2.row(o2)[c2];
                rule.apply(t1.comm_q2.entry_mut(o2, c2), out.reward, 0.0, true, cfg.gamma, cfg.alpha, vc2);
                rule.apply(
                    t1.move_q1.entry_mut(o1, c2, m1),
                    out.reward,
                    0.0,
                    true,
                    cfg.gamma,
                    cfg.alpha,
                    nm1.row(s1)[m1],
                );
                rule.apply(
                    t1.move_q2.entry_mut(o2, c1, m2),
                    out.reward,
                    0.0,
                    true,
                    cfg.gamma,
                    cfg.alpha,
                    nm2.row(s2)[m2],
                );
                break;
            }

            // Message value bootstraps on the next observation's best message.
            let maxc1 = t1.comm_q1.max_row(out.next.o1.index());
            let vc1 = nc1.row(o1)[c1];
            rule.apply(t1.comm_q1.entry_mut(o1, c1), out.reward, maxc1, false, cfg.gamma, cfg.alpha, vc1);
            let maxc2 = t1.comm_q2.max_row(out.next.o2.index());
            let vc2 = nc2.row(o2)[c2];
            rule.apply(t1.comm_q2.entry_mut(o2, c2), out.reward, maxc2, false, cfg.gamma, cfg.alpha, vc2);

            pending = Some(Pending { o1, c2, m1, o2, c1, m2, reward: out.reward });
            s = out.next;
        }
        record.push(episode, ret, length);
    }
    (t1, record)
}

pub fn run_lbic(
    spec: &GridSpec,
    cfg: &TrainConfig,
    rate_bits: u32,
    centralized_optimum: f64,
) -> Result<SchemeOutcome> {
    let train_cfg = cfg.with_seed(phase_seed(cfg.seed, PHASE_DISTRIBUTED));
    let (tables, record) = train_lbic(spec, &train_cfg, rate_bits, UpdateRule::Optimistic);
    let eval = evaluate_exact(&tables, spec, cfg.gamma, cfg.horizon);
    Ok(SchemeOutcome {
        result: SchemeResult {
            scheme: SchemeKind::Lbic,
            rate_bits,
            seed: cfg.seed,
            record,
            mean_return: eval.mean,
            std_error: eval.std_error,
            normalized: normalize(eval.mean, centralized_optimum)?,
            epsilon: None,
            bound: None,
            compression: None,
        },
        partition: None,
        marginal_values: None,
    })
}
