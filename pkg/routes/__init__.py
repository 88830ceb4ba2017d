import logging

from flask import Blueprint, Response, jsonify, request

from model.errors import AnalysisError, ConfigurationError, ModelError
from model.report import AnalysisRequest
from service import AnalysisService

logger = logging.getLogger(__name__)

analysis_bp = Blueprint("analysis", __name__)


def _error(exc: Exception):
    if isinstance(exc, (ModelError, ConfigurationError)):
        return jsonify({"error": str(exc)}), 400
    if isinstance(exc, AnalysisError):
        return jsonify({"error": str(exc)}), 422
    logger.exception("unexpected failure")
    return jsonify({"error": str(exc)}), 500


def _body():
    data = request.get_json(silent=True)
    if not data or not isinstance(data.get("model"), str):
        raise ConfigurationError("missing 'model' (model text)")
    return data, AnalysisRequest.from_dict(data)


@analysis_bp.route("/health", methods=["GET"])
def health():
    """Health check endpoint."""
    return jsonify({"status": "ok", "service": "belief-bound"}), 200


@analysis_bp.route("/analyze", methods=["POST"])
def analyze():
    """
    POST /analyze

    Request body (JSON):
    {
        "model": "pomdp\\nstates 3\\n...",
        "direction": "max",
        "objective": "reward",
        "threshold": "7/10",
        "clipping": true,
        "eta": 1,
        "size_budget": 4,
        "record": false
    }

    Response: the report JSON (plus "run_id" when recorded, status 201).
    """
    try:
        data, analysis_request = _body()
        report = AnalysisService.analyze(data["model"], analysis_request)
        payload = report.to_dict()
        if data.get("record"):
            payload["run_id"] = AnalysisService.record(report)
            return jsonify(payload), 201
        return jsonify(payload), 200
    except Exception as e:
        return _error(e)


@analysis_bp.route("/sweep", methods=["POST"])
def sweep():
    """
    POST /sweep

    Same body as /analyze plus "budgets": [0, 2, 4]. Responds with CSV
    budget,explored,bound,time_ms.
    """
    try:
        data, analysis_request = _body()
        budgets = data.get("budgets")
        if not budgets or not all(isinstance(b, int) and b >= 0 for b in budgets):
            raise ConfigurationError("'budgets' must be a non-empty list of non-negative integers")
        frame = AnalysisService.sweep(data["model"], analysis_request, budgets)
        return Response(frame.to_csv(index=False), status=200, mimetype="text/csv")
    except Exception as e:
        return _error(e)


@analysis_bp.route("/history", methods=["GET"])
def history():
    """
    GET /history?model_id=toy&limit=20

    Recorded runs, newest first.
    """
    try:
        model_id = request.args.get("model_id")
        limit = request.args.get("limit", 20, type=int)
        runs = AnalysisService.get_recent_history(model_id, limit=limit)
        return jsonify({
            "model_id": model_id,
            "count": len(runs),
            "history": [
                {"run_id": item["run_id"], "created_at": item["created_at"], "report": item["report"].to_dict()}
                for item in runs
            ],
        }), 200
    except Exception as e:
        return _error(e)


@analysis_bp.route("/history/<run_id>", methods=["DELETE"])
def delete_history(run_id: str):
    try:
        if not AnalysisService.delete_history_record(run_id):
            return jsonify({"error": f"unknown run {run_id}"}), 404
        return jsonify({"deleted": run_id}), 200
    except Exception as e:
        return _error(e)
