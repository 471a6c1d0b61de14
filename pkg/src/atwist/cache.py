"""Persistent sample cache: a human-inspectable CSV, append-only in use,
sorted by (c, a) on export, floats written with 17 significant digits so
round-trips are byte-exact."""

from __future__ import annotations

import os
from dataclasses import dataclass

from .twist_eval import Orbit, TwistPoint, TwistSample, batch_central_values

HEADER = "form_id,q,k,orbit,a,c,c_r,re,im,err_bound,terms"


def _fmt(x: float) -> str:
    return format(x, ".17g")


class CacheCorruption(Exception):
    pass


@dataclass(frozen=True)
class CacheKey:
    form_id: str
    orbit: str
    c: int
    a: int


class SampleCache:
    def __init__(self, path: str):
        self.path = path
        self.rows: dict = {}
        self._meta: dict = {}
        if os.path.exists(path):
            self._load()

    # -- persistence ---------------------------------------------------------

    def _load(self) -> None:
        with open(self.path) as fh:
            header = fh.readline().rstrip("\n")
            if header != HEADER:
                raise CacheCorruption(
                    f"bad cache header in {self.path}: {header!r}")
            for lineno, line in enumerate(fh, start=2):
                line = line.rstrip("\n")
                if not line:
                    continue
                parts = line.split(",")
                if len(parts) != 11:
                    raise CacheCorruption(
                        f"{self.path}:{lineno}: expected 11 fields, "
                        f"got {len(parts)}")
                (fid, q, k, orbit, a, c, c_r, re, im, err, terms) = parts
                key = CacheKey(fid, orbit, int(c), int(a))
                self.rows[key] = (float(c_r), float(re), float(im),
                                  float(err), int(terms))
                self._meta[fid] = (int(q), int(k))

    def write(self, path: str | None = None) -> str:
        path = path or self.path
        lines = [HEADER]
        for key in sorted(self.rows,
                          key=lambda k: (k.form_id, k.orbit, k.c, k.a)):
            c_r, re, im, err, terms = self.rows[key]
            q, k_wt = self._meta[key.form_id]
            lines.append(",".join([
                key.form_id, str(q), str(k_wt), key.orbit, str(key.a),
                str(key.c), _fmt(c_r), _fmt(re), _fmt(im), _fmt(err),
                str(terms)]))
        text = "\n".join(lines) + "\n"
        os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
        with open(path, "w") as fh:
            fh.write(text)
        return path

    # -- use ------------------------------------------------------------------

    def add(self, form, sample: TwistSample) -> None:
        key = CacheKey(form.form_id, sample.point.orbit.value,
                       sample.point.c, sample.point.a)
        self.rows[key] = (sample.point.c_r, sample.value.real,
                          sample.value.imag, sample.err_bound,
                          sample.terms_used)
        self._meta[form.form_id] = (form.q, form.k)

    def lookup(self, form, point: TwistPoint) -> TwistSample | None:
        key = CacheKey(form.form_id, point.orbit.value, point.c, point.a)
        row = self.rows.get(key)
        if row is None:
            return None
        c_r, re, im, err, terms = row
        return TwistSample(point, complex(re, im), err, terms)

    def get_or_compute(self, form, points, parallelism: int = 1,
                       eps: float = 1e-10, persist: bool = True):
        """Samples for all points, computing and appending the missing ones;
        output sorted by (c, a)."""
        points = sorted(points, key=lambda p: (p.c, p.a))
        have, missing = [], []
        for pt in points:
            s = self.lookup(form, pt)
            (have if s is not None else missing).append(s if s is not None else pt)
        failures = []
        if missing:
            computed, failures = batch_central_values(
                form, missing, parallelism=parallelism, eps=eps)
            for s in computed:
                self.add(form, s)
            have.extend(computed)
            if persist:
                self.write()
        have.sort(key=lambda s: (s.point.c, s.point.a))
        return have, failures

    def verify(self, forms: dict, eps: float = 1e-10) -> list:
        """Recompute every row and compare within 2 * err_bound; returns a
        list of mismatch descriptions (empty = clean)."""
        from .twist_eval import TwistEvaluator

        bad = []
        evaluators = {}
        for key in sorted(self.rows,
                          key=lambda k: (k.form_id, k.orbit, k.c, k.a)):
            form = forms.get(key.form_id)
            if form is None:
                bad.append(f"{key}: unknown form_id")
                continue
            ev = evaluators.setdefault(key.form_id, TwistEvaluator(form))
            maker = (TwistPoint.infinity_orbit if key.orbit == Orbit.INF.value
                     else TwistPoint.zero_orbit)
            pt = maker(key.a, key.c, form.q)
            c_r, re, im, err, _ = self.rows[key]
            fresh = ev.central_value(pt, eps=eps)
            tol = 2 * max(err, fresh.err_bound) + 1e-14
            if abs(fresh.value - complex(re, im)) > tol:
                bad.append(f"{key}: cached {complex(re, im)} vs "
                           f"recomputed {fresh.value} (tol {tol:g})")
        return bad
