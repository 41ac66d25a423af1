import argparse
from pathlib import Path


def output_dir(description: str) -> Path:
    p = argparse.ArgumentParser(description=description)
    p.add_argument("--out", default=str(Path(__file__).parent / "output"), help="directory for SVG files")
    out = Path(p.parse_args().out)
    out.mkdir(parents=True, exist_ok=True)
    return out
