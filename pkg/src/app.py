from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware

from api.solve_api import router as solve_router
from config import configure_logging, settings

configure_logging()


def create_app() -> FastAPI:
    app = FastAPI(title="Decomposition branching service")
    # No cross-origin access unless DBRANCH_CORS_ORIGINS lists origins
    if settings.cors_origins:
        app.add_middleware(
            CORSMiddleware,
            allow_origins=list(settings.cors_origins),
            allow_credentials=False,
            allow_methods=["*"],
            allow_headers=["*"],
        )
    app.include_router(solve_router, prefix="/api")
    return app


app = create_app()
