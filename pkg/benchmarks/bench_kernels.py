"""Compare the compiled kernels with the numpy fallback on synthetic pages.

    python benchmarks/bench_kernels.py [--pages N] [--repeat R]

Both backends are imported directly, so the numbers do not depend on which
one the package picked at import time.
"""

import argparse
import json
import sys
import timeit

import numpy as np

from darkcorpus import _pykernels
from darkcorpus.minhash import permutation_params
from darkcorpus.synth import SyntheticCrawl

try:
    from darkcorpus import _kernels
except ImportError:
    _kernels = None


def _texts(n_pages):
    crawl = SyntheticCrawl(seed=1)
    return [rec.get("text") or rec["html"] for rec in crawl.pages(n_pages)]


def _cases(texts):
    a, b = permutation_params(128, 1)
    blobs = [" ".join(t.lower().split()).encode("utf-8") for t in texts]
    words = [w.encode("utf-8") for t in texts[:200] for w in t.split()]
    hashes = [_pykernels.shingle_hashes(buf, 3) for buf in blobs]
    return {
        "hash_strings": lambda k: k.hash_strings(words),
        "shingle_hashes": lambda k: [k.shingle_hashes(buf, 3) for buf in blobs],
        "minhash": lambda k: [k.minhash(h, a, b) for h in hashes if len(h)],
        "text_signature": lambda k: [k.text_signature(buf, 3, a, b) for buf in blobs],
        "candidate_spans": lambda k: [k.candidate_spans(t, 14) for t in texts],
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--pages", type=int, default=500)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--json", action="store_true", help="print results as JSON")
    args = ap.parse_args(argv)

    texts = _texts(args.pages)
    mb = sum(len(t.encode("utf-8")) for t in texts) / 1e6
    backends = {"numpy": _pykernels}
    if _kernels is not None:
        backends["cython"] = _kernels
    else:
        print("compiled kernels not built; timing the fallback only", file=sys.stderr)

    rows = []
    for name, fn in _cases(texts).items():
        row = {"kernel": name}
        outputs = {}
        for label, mod in backends.items():
            outputs[label] = fn(mod)
            row[label] = min(timeit.repeat(lambda: fn(mod), number=1, repeat=args.repeat))
        if len(outputs) == 2:
            x, y = outputs["numpy"], outputs["cython"]
            same = all(np.array_equal(np.asarray(p), np.asarray(q)) for p, q in zip(x, y)) \
                if isinstance(x, list) else np.array_equal(x, y)
            row["agree"] = bool(same)
            row["speedup"] = row["numpy"] / row["cython"]
        rows.append(row)

    if args.json:
        print(json.dumps({"pages": args.pages, "mb": mb, "results": rows}, indent=2))
        return
    print(f"{args.pages} pages, {mb:.1f} MB of text, best of {args.repeat}")
    print(f"{'kernel':<16}{'numpy s':>10}{'cython s':>10}{'speedup':>9}  agree")
    for r in rows:
        cy = f"{r['cython']:10.3f}" if "cython" in r else f"{'-':>10}"
        sp = f"{r['speedup']:8.1f}x" if "speedup" in r else f"{'-':>9}"
        print(f"{r['kernel']:<16}{r['numpy']:10.3f}{cy}{sp}  {r.get('agree', '-')}")


if __name__ == "__main__":
    main()
