"""
logic layer: belief exploration, clipping, solving and the analysis pipeline.
"""

from service.analysis_service import AnalysisOutcome, AnalysisService, PreparedModel, verdict_for

__all__ = ["AnalysisOutcome", "AnalysisService", "PreparedModel", "verdict_for"]
