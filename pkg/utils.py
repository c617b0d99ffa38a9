import csv
import json
import os
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Union

from pydantic import BaseModel

from models import RunConfig

# Load environment variables from .env file
try:
    from dotenv import load_dotenv
    load_dotenv()
except ImportError:
    pass  # dotenv not available


def get_thread_count(flag: Optional[int] = None) -> int:
    """Worker count: the --threads flag, else FIBERS_THREADS, else 1"""
    if flag is not None:
        threads = flag
    else:
        raw = os.getenv("FIBERS_THREADS", "1")
        try:
            threads = int(raw)
        except ValueError:
            raise ValueError(f"FIBERS_THREADS must be an integer, got '{raw}'")
    if threads < 1:
        raise ValueError(f"Thread count must be at least 1, got {threads}")
    return threads


def get_output_dir() -> Path:
    """Directory for relative report paths (FIBERS_OUTPUT_DIR, default: current directory)"""
    return Path(os.getenv("FIBERS_OUTPUT_DIR", "."))


def resolve_output_path(flag: Optional[str], config: RunConfig) -> Optional[Path]:
    """--output wins over the config's output key; relative paths go under the output dir"""
    raw = flag if flag is not None else config.output
    if raw is None:
        return None
    path = Path(raw)
    return path if path.is_absolute() else get_output_dir() / path


def load_run_config(path: Union[str, Path]) -> RunConfig:
    """Read and validate a JSON run configuration"""
    return RunConfig.model_validate_json(Path(path).read_text(encoding="utf-8"))


def report_json(report: BaseModel) -> str:
    """Deterministic JSON: sorted keys, two-space indent, trailing newline"""
    payload = report.model_dump(mode="json", by_alias=True)
    return json.dumps(payload, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def write_json_report(report: BaseModel, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(report_json(report), encoding="utf-8")
    return path


def write_csv(path: Union[str, Path], header: Sequence[str], rows: Iterable[List[object]]) -> Path:
    """CSV with a header row, '.' decimals and '\\n' line ends; None becomes an empty cell"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow(["" if value is None else value for value in row])
    return path
