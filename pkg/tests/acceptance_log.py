"""Collects one result line per acceptance criterion."""

LINES: list[str] = []


def record(number: int, passed: bool, detail: str, seconds: float, budget: float) -> None:
    status = "PASS" if passed else "FAIL"
    line = f"criterion {number:>2}: {status}  {detail}  [{seconds:.1f}s / {budget:.0f}s]"
    LINES.append(line)
    print(line)
