"""
Read-only access to run artifacts under OUTPUT_DIR
"""
from pathlib import Path
from typing import List

from fastapi import APIRouter, Depends, HTTPException
from fastapi.responses import Response

from config import settings
from experiments.pipeline import FIDELITY_FILE, MANIFEST_FILE
from schemas import FidelityReport, Manifest

router = APIRouter()

MEDIA_TYPES = {".json": "application/json", ".csv": "text/csv", ".svg": "image/svg+xml"}


def get_output_root() -> Path:
    return Path(settings.OUTPUT_DIR)


def _inside(root: Path, *parts: str) -> Path:
    """Resolve a path under root; anything escaping it is reported as missing"""
    base = root.resolve()
    target = base.joinpath(*parts).resolve()
    if target != base and base not in target.parents:
        raise HTTPException(status_code=404, detail="Artifact not found")
    return target


def _run_dir(root: Path, run_id: str) -> Path:
    run = _inside(root, run_id)
    if not (run / MANIFEST_FILE).is_file():
        raise HTTPException(status_code=404, detail="Run not found")
    return run


@router.get("/runs", response_model=List[str])
async def list_runs(root: Path = Depends(get_output_root)):
    """Every directory under the output root that holds a manifest"""
    if not root.is_dir():
        return []
    return sorted(p.parent.relative_to(root).as_posix() for p in root.rglob(MANIFEST_FILE))


@router.get("/runs/{run_id:path}/manifest", response_model=Manifest)
async def get_manifest(run_id: str, root: Path = Depends(get_output_root)):
    run = _run_dir(root, run_id)
    return Manifest.model_validate_json((run / MANIFEST_FILE).read_text(encoding="utf-8"))


@router.get("/runs/{run_id:path}/fidelity", response_model=List[FidelityReport])
async def get_fidelity(run_id: str, root: Path = Depends(get_output_root)):
    path = _run_dir(root, run_id) / FIDELITY_FILE
    if not path.is_file():
        raise HTTPException(status_code=404, detail="No fidelity report for this run")
    return Response(path.read_text(encoding="utf-8"), media_type="application/json")


@router.get("/runs/{run_id:path}/grids", response_model=List[str])
async def list_grids(run_id: str, root: Path = Depends(get_output_root)):
    grids = _run_dir(root, run_id) / "grids"
    if not grids.is_dir():
        return []
    return sorted(p.name for p in grids.iterdir() if p.suffix in (".json", ".csv"))


def _artifact(root: Path, run_id: str, folder: str, name: str, suffixes) -> Response:
    path = _inside(_run_dir(root, run_id), folder, name)
    if path.suffix not in suffixes or not path.is_file():
        raise HTTPException(status_code=404, detail="Artifact not found")
    return Response(path.read_bytes(), media_type=MEDIA_TYPES[path.suffix])


@router.get("/runs/{run_id:path}/grids/{name}")
async def get_grid(run_id: str, name: str, root: Path = Depends(get_output_root)):
    """Exported grid as stored (JSON or CSV)"""
    return _artifact(root, run_id, "grids", name, (".json", ".csv"))


@router.get("/runs/{run_id:path}/svg/{name}")
async def get_svg(run_id: str, name: str, root: Path = Depends(get_output_root)):
    return _artifact(root, run_id, "svg", name, (".svg",))
