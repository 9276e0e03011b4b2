//! TriMSM swap matching, its no-sleep variant and the stability check.

use log::debug;

use super::evaluate::{Evaluation, Evaluator};
use super::moves::{moves_for_pair, partners};
use super::{cover_all_ubs, recp_init, MatchContext, MatchSettings, Matching, SolutionReport};
use crate::error::Result;
use crate::powerctl::PowerControl;

/// First approved move of the matching in sweep order, if any.
fn first_blocking(ev: &mut Evaluator<'_, '_>, matching: &Matching, current: &Evaluation) -> Result<Option<Matching>> {
    let k_n = matching.assoc().num_ue();
    for i in 0..k_n {
        for j in partners(k_n, i) {
            for mv in moves_for_pair(matching, i, j) {
                if let Some((next, _)) = ev.try_move(matching, current, &mv)? {
                    return Ok(Some(next));
                }
            }
        }
    }
    Ok(None)
}

fn is_stable(ev: &mut Evaluator<'_, '_>, matching: &Matching) -> Result<bool> {
    let current = ev.eval(matching)?;
    Ok(first_blocking(ev, matching, &current)?.is_none())
}

/// True when no candidate move of `matching` is approved under `control`.
pub fn verify_stability(matching: &Matching, control: PowerControl, ctx: &MatchContext<'_>) -> Result<bool> {
    is_stable(&mut Evaluator::new(ctx, control), matching)
}

/// Swap phase from `init` with a final SLMDB pass for the heuristic
/// controllers.
fn swap_phase(mut ev: Evaluator<'_, '_>, init: Matching, settings: &MatchSettings, nos: bool) -> Result<SolutionReport> {
    let ctx = *ev.ctx();
    let k_n = init.assoc().num_ue();
    let mut current = init;
    let mut cur_eval = ev.eval(&current)?;
    let mut swaps = 0;
    let mut sweeps = 0;
    let mut converged = false;
    while sweeps < settings.max_sweeps {
        sweeps += 1;
        let mut approved = 0;
        for i in 0..k_n {
            for j in partners(k_n, i) {
                for mv in moves_for_pair(&current, i, j) {
                    if let Some((next, e)) = ev.try_move(&current, &cur_eval, &mv)? {
                        current = next;
                        cur_eval = e;
                        approved += 1;
                        break;
                    }
                }
            }
        }
        swaps += approved;
        debug!("sweep {sweeps}: {approved} approved, EE {:.4e}", cur_eval.ee);
        if approved == 0 {
            converged = true;
            break;
        }
    }
    let stable = converged && is_stable(&mut ev, &current)?;
    let mut solves = ev.solves();
    let final_eval = if ev.control() == PowerControl::Slmdb {
        cur_eval
    } else {
        let mut refine = Evaluator::new(&ctx, PowerControl::Slmdb);
        if nos {
            refine = refine.keeping_awake();
        }
        let e = refine.eval(&current)?;
        solves += 1;
        e
    };
    let final_eval = std::rc::Rc::unwrap_or_clone(final_eval);
    Ok(SolutionReport {
        matching: current,
        ee: final_eval.ee,
        infeasible: !final_eval.qos_ok,
        power: final_eval.power,
        swap_count: swaps,
        evaluation_count: solves,
        sweeps,
        stable,
    })
}

/// TriMSM from an explicit initial matching.
pub fn trimsm_from(init: Matching, ctx: &MatchContext<'_>, control: PowerControl, settings: &MatchSettings) -> Result<SolutionReport> {
    settings.validate()?;
    swap_phase(Evaluator::new(ctx, control), init, settings, false)
}

/// TriMSM: RECP initialization followed by swap matching.
pub fn trimsm(ctx: &MatchContext<'_>, control: PowerControl, settings: &MatchSettings) -> Result<SolutionReport> {
    let init = recp_init(ctx.corr(), ctx.l, ctx.n, settings.delta_percent)?;
    trimsm_from(init, ctx, control, settings)
}

/// TriMSM without sleeping: every UBS stays awake and keeps at least one
/// UE. When the caps cannot cover every UBS the run proceeds from the
/// RECP matching, still billing all UBSs as awake, and is flagged infeasible.
pub fn nos_assoc(ctx: &MatchContext<'_>, control: PowerControl, settings: &MatchSettings) -> Result<SolutionReport> {
    settings.validate()?;
    let recp = recp_init(ctx.corr(), ctx.l, ctx.n, settings.delta_percent)?;
    let (init, covered) = match cover_all_ubs(&recp, ctx.corr()) {
        Some(c) => (c, true),
        None => (recp, false),
    };
    let mut report = swap_phase(Evaluator::new(ctx, control).keeping_awake(), init, settings, true)?;
    report.infeasible |= !covered;
    Ok(report)
}
