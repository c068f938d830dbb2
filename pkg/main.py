"""
trajscape artifact API
"""
from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware
import uvicorn

from config import configure_logging, settings
from routers import artifacts

configure_logging()

app = FastAPI(
    title="trajscape artifact API",
    description="Read-only access to trajectories, landscape grids, renders and fidelity reports",
    version="1.0.0"
)

# CORS middleware
app.add_middleware(
    CORSMiddleware,
    allow_origins=settings.CORS_ORIGINS,
    allow_credentials=True,
    allow_methods=["GET"],
    allow_headers=["*"],
)

app.include_router(artifacts.router, prefix="/api", tags=["Artifacts"])


@app.get("/")
async def root():
    return {
        "message": "trajscape artifact API",
        "version": "1.0.0",
        "output_dir": settings.OUTPUT_DIR,
    }


@app.get("/api/health")
async def health_check():
    return {"status": "healthy"}


if __name__ == "__main__":
    uvicorn.run(
        "main:app",
        host=settings.HOST,
        port=settings.PORT,
        reload=settings.DEBUG
    )
