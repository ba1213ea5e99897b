import hashlib
import json
import logging
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

import numpy as np
import pandas as pd

from app import __version__
from app.schemas.config import RunConfig
from app.schemas.report import EvalReport, RunManifest

logger = logging.getLogger(__name__)

CURVE_COLUMNS = ["method", "seed", "episodes", "success_rate", "mean_final_distance"]
BUCKET_COLUMNS = ["method", "seed", "distance", "success_rate", "tasks", "satisfiable"]


def config_hash(config: RunConfig) -> str:
    return hashlib.sha256(config.canonical_json().encode("utf-8")).hexdigest()


def curves_frame(reports: Sequence[EvalReport]) -> pd.DataFrame:
    rows = [
        {"method": r.method, "seed": r.seed, "episodes": p.episodes_trained,
         "success_rate": p.success_rate, "mean_final_distance": p.mean_final_distance}
        for r in reports for p in r.series
    ]
    return pd.DataFrame(rows, columns=CURVE_COLUMNS)


def buckets_frame(reports: Sequence[EvalReport]) -> pd.DataFrame:
    rows = [
        {"method": r.method, "seed": b.seed, "distance": b.distance, "success_rate": b.success_rate,
         "tasks": b.tasks, "satisfiable": b.satisfiable}
        for r in reports for b in r.buckets
    ]
    return pd.DataFrame(rows, columns=BUCKET_COLUMNS)


def write_trajectories(trajectories: Sequence[np.ndarray], out_dir: Path) -> List[Path]:
    """One file per task, one line of coordinates (``x y`` in 2-D) per visited position."""
    folder = Path(out_dir) / "trajectories"
    folder.mkdir(parents=True, exist_ok=True)
    paths = []
    for i, path in enumerate(trajectories):
        target = folder / f"task_{i:03d}.txt"
        np.savetxt(target, np.atleast_2d(path), fmt="%.6f")
        paths.append(target)
    return paths


def emit_metrics(reports: Union[EvalReport, Sequence[EvalReport]], out_dir: Union[str, Path],
                 config: Optional[RunConfig] = None,
                 trajectories: Optional[Sequence[np.ndarray]] = None) -> Dict[str, Path]:
    """
    Writes curves.csv, buckets.csv, trajectories/*.txt and, when a config is
    given, manifest.json with the config hash.
    """
    if isinstance(reports, EvalReport):
        reports = [reports]
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    files: Dict[str, Path] = {}

    files["curves"] = out_dir / "curves.csv"
    curves_frame(reports).to_csv(files["curves"], index=False)
    files["buckets"] = out_dir / "buckets.csv"
    buckets_frame(reports).to_csv(files["buckets"], index=False)
    for i, path in enumerate(write_trajectories(trajectories or [], out_dir)):
        files[f"trajectory_{i}"] = path
    files["report"] = out_dir / "report.json"
    files["report"].write_text(json.dumps([r.model_dump(mode="json") for r in reports], indent=2), encoding="utf-8")

    if config is not None:
        manifest = RunManifest(
            run_name=config.run_name, method=config.method.value, env=config.env.value, seed=config.seed,
            preset=config.preset, config=config.model_dump(mode="json"), config_hash=config_hash(config),
            version=__version__, files=sorted(p.relative_to(out_dir).as_posix() for p in files.values()),
            aborted=any(r.aborted for r in reports),
        )
        files["manifest"] = out_dir / "manifest.json"
        with open(files["manifest"], "w", encoding="utf-8") as f:
            json.dump(manifest.model_dump(mode="json"), f, indent=2, ensure_ascii=False)
    logger.info(f"💾 Metrics written to {out_dir}")
    return files


def load_reports(out_dir: Union[str, Path]) -> List[EvalReport]:
    data = json.loads((Path(out_dir) / "report.json").read_text(encoding="utf-8"))
    return [EvalReport.model_validate(item) for item in data]


def load_manifest(out_dir: Union[str, Path]) -> RunManifest:
    return RunManifest.model_validate_json((Path(out_dir) / "manifest.json").read_text(encoding="utf-8"))
