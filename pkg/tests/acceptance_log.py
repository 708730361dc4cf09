"""Collects acceptance sub-check outcomes for the end-of-run summary."""

RESULTS: dict = {}


def record(criterion: int, label: str, ok: bool, detail: str = "") -> bool:
    RESULTS.setdefault(criterion, []).append((label, bool(ok), detail))
    return bool(ok)


def summary_lines() -> list:
    lines = []
    for k in sorted(RESULTS):
        subs = RESULTS[k]
        status = "PASS" if all(ok for _, ok, _ in subs) else "FAIL"
        parts = "; ".join(f"{lab} {'ok' if ok else 'FAILED'}{' (' + det + ')' if det else ''}" for lab, ok, det in subs)
        lines.append(f"criterion {k}: {status}  [{parts}]")
    return lines
