"""Attacks on split layouts and the scorers that grade them."""

from .crouting import DEFAULT_BBOXES, BBoxRow, CroutingReport, crouting_attack, score_crouting
from .matching import assignment_cost, min_cost_assignment
from .proximity import AttackResult, HintConfig, proximity_attack
from .scoring import CcrScore, SolutionSpace, score_ccr, solution_space

__all__ = ["DEFAULT_BBOXES", "BBoxRow", "CroutingReport", "crouting_attack", "score_crouting",
           "assignment_cost", "min_cost_assignment", "AttackResult", "HintConfig",
           "proximity_attack", "CcrScore", "SolutionSpace", "score_ccr", "solution_space"]
