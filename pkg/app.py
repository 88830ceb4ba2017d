"""
belief-bound web service: Flask application.

Layered architecture:
    routes/   -> Flask blueprints  (Controller layer)
    service/  -> Analysis logic    (Service layer)
    dao/      -> Model files, run log (DAO layer)
    model/    -> Data classes      (Model layer)
    config/   -> Settings, logging, DB connection (Infrastructure)

Usage:
    python app.py --port 5050

Endpoints:
    POST   /analyze          lower (max) / upper (min) bound for a model
    POST   /sweep            bounds over a list of size budgets (CSV)
    GET    /history          recorded runs
    DELETE /history/<id>     drop a recorded run
    GET    /health           service health check
"""

import argparse
import os

from flask import Flask

from config.database import init_db
from config.settings import configure_logging
from routes import analysis_bp


def create_app():
    """Application factory: creates and configures the Flask app."""
    app = Flask(__name__)
    app.register_blueprint(analysis_bp)
    return app


app = create_app()


if __name__ == "__main__":
    parser = argparse.ArgumentParser(description="belief-bound analysis service")
    parser.add_argument("--port", type=int, default=int(os.environ.get("PORT", 5050)))
    args = parser.parse_args()

    configure_logging()
    init_db()

    app.run(host="0.0.0.0", port=args.port, threaded=True)
