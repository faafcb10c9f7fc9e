#!/usr/bin/env python3
"""Write MovieLens-100K as u.data / u.item.

Sources, tried in order:
  1. the official GroupLens archive (ml-100k.zip)
  2. a local directory holding the RecBole atomic files ml-100k.inter / ml-100k.item
     (pass it with --recbole-dir; the recbole wheel on PyPI ships them under
     recbole/dataset_example/ml-100k/)
"""
import argparse
import io
import pathlib
import sys
import urllib.request
import zipfile

GENRES = [
    "unknown", "Action", "Adventure", "Animation", "Children's", "Comedy",
    "Crime", "Documentary", "Drama", "Fantasy", "Film-Noir", "Horror",
    "Musical", "Mystery", "Romance", "Sci-Fi", "Thriller", "War", "Western",
]
URL = "https://files.grouplens.org/datasets/movielens/ml-100k.zip"


def from_grouplens(out: pathlib.Path) -> bool:
    try:
        blob = urllib.request.urlopen(URL, timeout=30).read()
    except OSError as exc:
        print(f"download failed: {exc}", file=sys.stderr)
        return False
    with zipfile.ZipFile(io.BytesIO(blob)) as zf:
        for name in ("u.data", "u.item"):
            (out / name).write_bytes(zf.read(f"ml-100k/{name}"))
    return True


def from_recbole(src: pathlib.Path, out: pathlib.Path) -> None:
    inter = (src / "ml-100k.inter").read_text(encoding="latin-1").splitlines()[1:]
    with open(out / "u.data", "w", encoding="latin-1") as f:
        for line in inter:
            user, item, rating, ts = line.split("\t")
            f.write(f"{user}\t{item}\t{int(float(rating))}\t{int(float(ts))}\n")
    rows = (src / "ml-100k.item").read_text(encoding="latin-1").splitlines()[1:]
    with open(out / "u.item", "w", encoding="latin-1") as f:
        for line in rows:
            item, title, year, classes = (line.split("\t") + [""] * 4)[:4]
            present = set(classes.split())
            flags = "|".join("1" if g in present else "0" for g in GENRES)
            f.write(f"{item}|{title} ({year})|01-Jan-{year}|||{flags}\n")


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="data/ml-100k")
    ap.add_argument("--recbole-dir")
    args = ap.parse_args()
    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.recbole_dir:
        from_recbole(pathlib.Path(args.recbole_dir), out)
    elif not from_grouplens(out):
        return 1
    print(f"wrote {out}/u.data and {out}/u.item")
    return 0


if __name__ == "__main__":
    sys.exit(main())
