"""
Analysis pipeline behind the CLI and the HTTP API.

parse -> goal observability -> objective encoding -> negation (min) ->
underlying-MDP values and cut-off policy -> exploration -> solving -> report.
"""

import logging
import time
from typing import Iterable, List, NamedTuple, Optional

import pandas as pd

from config.database import init_db
from config.settings import get_settings
from dao.model_format import parse_pomdp
from dao.report_dao import ReportDAO
from model.abstraction import AbstractionMdp, ExplorationConfig, SolveResult
from model.errors import AnalysisError, ModelValidationError
from model.pomdp import GoalSpec, Pomdp, RewardSign, RewardStructure
from model.report import INCONCLUSIVE, REFUTED, AnalysisReport, AnalysisRequest
from model.values import ExtReal, MemorylessObsPolicy, StateValues, ext_repr, is_infinite
from service.explorer import explore
from service.mdp_analysis import (
    cutoff_value,
    evaluate_policy,
    heuristic_policy,
    max_expected_reward,
    min_expected_reward,
)
from service.solver import solve_max
from service.transforms import encode_reachability, make_goals_observable, negate_rewards

logger = logging.getLogger(__name__)


class PreparedModel(NamedTuple):
    """A model ready for exploration; everything here is independent of the exploration knobs."""
    pomdp: Pomdp
    rewards: RewardStructure
    goals: GoalSpec
    u: StateValues
    max_values: StateValues
    policy: Optional[MemorylessObsPolicy]
    cutoff_values: StateValues


class AnalysisOutcome(NamedTuple):
    report: AnalysisReport
    abstraction: AbstractionMdp
    solution: SolveResult


def verdict_for(direction: str, bound: ExtReal, threshold) -> Optional[str]:
    """A one-sided bound can only refute the threshold claim, never confirm it."""
    if threshold is None:
        return None
    if direction == "max":
        return REFUTED if bound > threshold else INCONCLUSIVE
    return REFUTED if bound < threshold else INCONCLUSIVE


def _resolve_goals(pomdp: Pomdp, file_goals: Optional[GoalSpec], request: AnalysisRequest) -> GoalSpec:
    if request.goal_observations:
        return GoalSpec(goal_observations=frozenset(pomdp.observation_index(n) for n in request.goal_observations))
    if file_goals is None:
        raise ModelValidationError("no goal given: add a goal/goal-obs line or pass goal observations")
    return file_goals


def _elapsed_ms(start: float, request: AnalysisRequest) -> int:
    return 0 if request.deterministic else int(round((time.perf_counter() - start) * 1000))


class AnalysisService:
    @staticmethod
    def prepare(text: str, request: AnalysisRequest) -> PreparedModel:
        """Parse and transform the model, then compute the values exploration relies on."""
        pomdp, rewards, file_goals = parse_pomdp(text)
        goals = _resolve_goals(pomdp, file_goals, request)
        goal_states = goals.states(pomdp)
        if not goals.observation_characterized(pomdp):
            pomdp, rewards, goals = make_goals_observable(pomdp, rewards, goal_states)
            goal_states = goals.states(pomdp)
        if request.objective == "reachability":
            rewards = encode_reachability(pomdp, goal_states)
        if request.direction == "min":
            rewards = negate_rewards(rewards)

        u = min_expected_reward(pomdp, rewards, goal_states)
        max_values = max_expected_reward(pomdp, rewards, goal_states)
        if request.cutoff_source == "min":
            policy, cutoff = None, u
        else:
            policy = heuristic_policy(pomdp, rewards, goal_states, max_values)
            cutoff = evaluate_policy(pomdp, policy, rewards, goal_states)
        logger.info(
            "prepared model: %d states, %d observations, %s rewards",
            pomdp.num_states, pomdp.num_observations, rewards.sign.value,
        )
        return PreparedModel(pomdp, rewards, goals, u, max_values, policy, cutoff)

    @staticmethod
    def run_prepared(prepared: PreparedModel, request: AnalysisRequest,
                     config: ExplorationConfig) -> AnalysisOutcome:
        start = time.perf_counter()
        abstraction = explore(
            prepared.pomdp,
            prepared.rewards,
            prepared.goals,
            lambda belief: cutoff_value(belief, prepared.cutoff_values),
            prepared.u if config.clipping_enabled else None,
            config,
        )
        if not abstraction.usable:
            raise AnalysisError("exploration hard cap exceeded")

        bounds = None
        if prepared.rewards.sign is RewardSign.POSITIVE and prepared.max_values.exact:
            bounds = [0.0 if b is None else float(cutoff_value(b, prepared.max_values)) for b in abstraction.beliefs]
        solution = solve_max(abstraction, precision=request.precision, upper_bounds=bounds)

        bound = solution.value if request.direction == "max" else -solution.value
        if not is_infinite(bound) and bound == 0:
            bound = abs(bound)  # no -0.0 in reports
        initial_is_goal = abstraction.initial in abstraction.goal_states
        report = AnalysisReport(
            model_id=request.model_id,
            direction=request.direction,
            objective=request.objective,
            bound=bound,
            bound_kind="lower" if request.direction == "max" else "upper",
            threshold=request.threshold,
            verdict=verdict_for(request.direction, bound, request.threshold),
            explored_beliefs=abstraction.explored_beliefs,
            cut_transitions=abstraction.cut_transitions,
            clip_transitions=abstraction.clip_transitions,
            eta=config.eta if config.clipping_enabled else None,
            wall_time_ms=_elapsed_ms(start, request),
            abstraction_states=abstraction.num_states,
            initial_is_goal=initial_is_goal,
            precision_limited=solution.precision_limited,
            bound_exact=str(bound) if solution.exact else None,
            iterations=solution.iterations,
            clipping_solver=config.clipping_solver if config.clipping_enabled else None,
            cutoff_source=request.cutoff_source,
        )
        logger.info("analysis of %s: %s bound %s", request.model_id, report.bound_kind, ext_repr(bound))
        return AnalysisOutcome(report, abstraction, solution)

    @staticmethod
    def run(text: str, request: AnalysisRequest) -> AnalysisOutcome:
        start = time.perf_counter()
        prepared = AnalysisService.prepare(text, request)
        outcome = AnalysisService.run_prepared(prepared, request, request.exploration_config(get_settings().threads))
        outcome.report.wall_time_ms = _elapsed_ms(start, request)
        return outcome

    @staticmethod
    def analyze(text: str, request: AnalysisRequest) -> AnalysisReport:
        return AnalysisService.run(text, request).report

    @staticmethod
    def sweep(text: str, request: AnalysisRequest, budgets: Iterable[int]) -> pd.DataFrame:
        """One analysis per absolute size budget: budget, explored, bound, time_ms."""
        prepared = AnalysisService.prepare(text, request)
        threads = get_settings().threads
        rows = []
        for budget in budgets:
            config = request.exploration_config(threads, size_budget=budget)
            report = AnalysisService.run_prepared(prepared, request, config).report
            rows.append({
                "budget": budget,
                "explored": report.explored_beliefs,
                "bound": float(report.bound),
                "time_ms": report.wall_time_ms,
            })
        return pd.DataFrame(rows, columns=["budget", "explored", "bound", "time_ms"])

    @staticmethod
    def compare(text: str, request: AnalysisRequest, etas: Iterable[int]) -> pd.DataFrame:
        """Cut-off only against clipping at each resolution, on one model."""
        prepared = AnalysisService.prepare(text, request)
        threads = get_settings().threads
        runs = [("cutoff", request.exploration_config(threads, clipping=False))]
        runs += [("clipping", request.exploration_config(threads, clipping=True, eta=eta)) for eta in etas]
        rows = []
        for name, config in runs:
            report = AnalysisService.run_prepared(prepared, request, config).report
            rows.append({
                "config": name,
                "eta": report.eta,
                "explored": report.explored_beliefs,
                "cut": report.cut_transitions,
                "clip": report.clip_transitions,
                "bound": float(report.bound),
                "time_ms": report.wall_time_ms,
            })
        frame = pd.DataFrame(rows, columns=["config", "eta", "explored", "cut", "clip", "bound", "time_ms"])
        frame["eta"] = frame["eta"].astype("Int64")
        return frame

    @staticmethod
    def record(report: AnalysisReport) -> str:
        init_db()
        run_id = ReportDAO.insert_report(report)
        report.run_id = run_id
        logger.info("recorded run %s", run_id)
        return run_id

    @staticmethod
    def get_recent_history(model_id: Optional[str] = None, limit: int = 20) -> List[dict]:
        init_db()
        return ReportDAO.list_recent_reports(model_id, limit=limit)

    @staticmethod
    def delete_history_record(run_id: str) -> bool:
        init_db()
        return ReportDAO.delete_report(run_id)
