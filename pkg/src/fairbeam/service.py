"""HTTP front end for campaign runs.

Campaigns are submitted as JSON configs and run in background threads; the
client polls the job and downloads the three output files when it is done.
Config problems surface at submission time (422 for schema violations, 400
when the analog stage cannot be built for the requested groups), so a job
that gets accepted only fails for runtime reasons.
"""

import tempfile
import threading
import uuid
from pathlib import Path
from typing import Literal, Optional

from fastapi import FastAPI, HTTPException
from fastapi.responses import FileResponse
from pydantic import BaseModel, Field

from . import __version__
from .config import SystemConfig
from .errors import ConfigError, FairbeamError, InsufficientBeamsError
from .harness import build_beamformer, emit_results, run_campaign

OUTPUT_FILES = ("records.csv", "traces.csv", "summary.json")
_MEDIA = {"records.csv": "text/csv", "traces.csv": "text/csv",
          "summary.json": "application/json"}


class CampaignRequest(BaseModel):
    config: SystemConfig
    workers: int = Field(default=1, ge=1, le=64)


class CampaignSubmitted(BaseModel):
    job_id: str


class CampaignStatus(BaseModel):
    job_id: str
    state: Literal["pending", "running", "done", "failed"]
    error: Optional[str] = None
    n_records: Optional[int] = None
    n_failures: Optional[int] = None
    files: Optional[list[str]] = None
    aggregates: Optional[list[dict]] = None


class _Job:
    def __init__(self, request: CampaignRequest, out_dir: Path):
        self.id = uuid.uuid4().hex
        self.request = request
        self.out_dir = out_dir
        self.state = "pending"
        self.error: Optional[str] = None
        self.n_records: Optional[int] = None
        self.n_failures: Optional[int] = None
        self.aggregates: Optional[list] = None

    def run(self):
        self.state = "running"
        try:
            result = run_campaign(self.request.config, workers=self.request.workers)
            emit_results(result, self.out_dir)
            self.n_records = len(result.records)
            self.n_failures = len(result.failures)
            self.aggregates = [vars(row) for row in result.aggregates]
            self.state = "done"
        except Exception as exc:  # noqa: BLE001 — job must report, not crash the app
            self.error = f"{type(exc).__name__}: {exc}"
            self.state = "failed"

    def status(self) -> CampaignStatus:
        return CampaignStatus(
            job_id=self.id,
            state=self.state,
            error=self.error,
            n_records=self.n_records,
            n_failures=self.n_failures,
            files=list(OUTPUT_FILES) if self.state == "done" else None,
            aggregates=self.aggregates,
        )


_jobs: dict = {}
_jobs_lock = threading.Lock()
_data_root: Optional[Path] = None


def _root() -> Path:
    global _data_root
    if _data_root is None:
        _data_root = Path(tempfile.mkdtemp(prefix="fairbeam-jobs-"))
    return _data_root


def reset_jobs() -> None:
    """Drop all job bookkeeping (used between test sessions)."""
    with _jobs_lock:
        _jobs.clear()


app = FastAPI(title="fairbeam", version=__version__)


@app.get("/health")
def health():
    return {"status": "ok", "version": __version__}


@app.post("/campaigns", response_model=CampaignSubmitted, status_code=202)
def submit_campaign(request: CampaignRequest):
    try:
        # cheap feasibility check so bad group layouts fail at submission
        build_beamformer(request.config)
    except (ConfigError, InsufficientBeamsError, FairbeamError) as exc:
        raise HTTPException(status_code=400, detail=str(exc)) from exc
    job = _Job(request, _root() / uuid.uuid4().hex)
    with _jobs_lock:
        _jobs[job.id] = job
    threading.Thread(target=job.run, daemon=True).start()
    return CampaignSubmitted(job_id=job.id)


def _get_job(job_id: str) -> _Job:
    with _jobs_lock:
        job = _jobs.get(job_id)
    if job is None:
        raise HTTPException(status_code=404, detail=f"no such job {job_id!r}")
    return job


@app.get("/campaigns/{job_id}", response_model=CampaignStatus)
def campaign_status(job_id: str):
    return _get_job(job_id).status()


@app.get("/campaigns/{job_id}/files/{name}")
def campaign_file(job_id: str, name: str):
    job = _get_job(job_id)
    if name not in OUTPUT_FILES:
        raise HTTPException(status_code=404, detail=f"unknown output file {name!r}")
    if job.state != "done":
        raise HTTPException(status_code=409, detail=f"job is {job.state}, not done")
    return FileResponse(job.out_dir / name, media_type=_MEDIA[name], filename=name)
