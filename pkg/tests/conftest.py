import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))


import hashlib  # noqa: E402
import shutil  # noqa: E402

import pytest  # noqa: E402


def tree_digest(root: Path) -> dict[str, str]:
    return {p.relative_to(root).as_posix(): hashlib.sha256(p.read_bytes()).hexdigest()
            for p in sorted(root.rglob("*")) if p.is_file()}


@pytest.fixture(scope="session")
def e2e(tmp_path_factory):
    """Two full fixture runs against one server, then a rerun of run A with annotate/ deleted."""
    from docharvest.pipeline import load_config, run_pipeline
    from support.pipeline_fixture import start_server, write_inputs

    server = start_server()
    base = tmp_path_factory.mktemp("e2e")
    out = {}
    try:
        for name in ("a", "b"):
            cfg = load_config(write_inputs(base / name, server))
            report = run_pipeline(cfg)
            out[name] = {"cfg": cfg, "report": report, "hits": dict(server.hits)}
        cfg = out["a"]["cfg"]
        out["a"]["annotate_tree"] = tree_digest(cfg.out / "annotate")
        out["a"]["dataset_tree"] = tree_digest(cfg.out / "dataset")
        out["a"]["report_json"] = (cfg.out / "reports" / "report.json").read_bytes()
        hits_before = dict(server.hits)
        shutil.rmtree(cfg.out / "annotate")
        rerun = run_pipeline(cfg)
        out["resume"] = {
            "report": rerun,
            "new_hits": {k: v - hits_before.get(k, 0) for k, v in server.hits.items() if v != hits_before.get(k, 0)},
            "annotate_tree": tree_digest(cfg.out / "annotate"),
            "dataset_tree": tree_digest(cfg.out / "dataset"),
            "report_json": (cfg.out / "reports" / "report.json").read_bytes(),
        }
        yield out
    finally:
        server.__exit__(None, None, None)
