"""Subprocess adapter: benchmark any optimizer speaking the ask/tell protocol.

Wire protocol, newline-delimited UTF-8 on stdin/stdout:

    harness -> method:  INIT <D> <budget> <seed> <lb_1> ... <lb_D> <ub_1> ... <ub_D>
    method  -> harness: ASK <x_1> ... <x_D>
    harness -> method:  TELL <fitness>
    method  -> harness: DONE            (finished voluntarily)
    harness -> method:  STOP            (sent right after the last budgeted TELL)

The harness owns the loop: it evaluates, counts and replies.  Any protocol
violation, crash, or request past the budget marks the run failed; failed
runs carry a reason and are never fed into statistics.
"""

from __future__ import annotations

import select
import shlex
import subprocess
import time

import numpy as np

from gradebench.optimizers.trace import BudgetedRun, RunTrace

READ_TIMEOUT_S = 60.0


class ProtocolError(RuntimeError):
    pass


def _read_line(proc, timeout=READ_TIMEOUT_S) -> str:
    ready, _, _ = select.select([proc.stdout], [], [], timeout)
    if not ready:
        raise ProtocolError("timed out waiting for the method process")
    line = proc.stdout.readline()
    if line == "":
        raise ProtocolError("method process closed its output")
    return line.strip()


def _failed_trace(problem, method_id, seed, budget, reason, ctx=None) -> RunTrace:
    checkpoints = list(ctx.checkpoints) if ctx is not None else []
    return RunTrace(
        problem_id=problem.id,
        method_id=method_id,
        seed=seed,
        budget=budget,
        n_eval=ctx.n_eval if ctx is not None else 0,
        stage_fitness={},
        checkpoints=checkpoints,
        failed=True,
        failure_reason=reason,
    )


def run_external(command: str, problem, budget: int, seed: int, method_id: str) -> RunTrace:
    t_start = time.perf_counter()
    ctx = BudgetedRun(problem, budget)
    try:
        proc = subprocess.Popen(
            shlex.split(command),
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            text=True,
            bufsize=1,
        )
    except OSError as exc:
        return _failed_trace(problem, method_id, seed, budget, f"launch failed: {exc}")

    def send(line: str):
        proc.stdin.write(line + "\n")
        proc.stdin.flush()

    bounds = " ".join(repr(float(v)) for v in problem.lower_bounds) + " " + " ".join(
        repr(float(v)) for v in problem.upper_bounds
    )
    stopped = False
    try:
        send(f"INIT {problem.dimension} {budget} {seed} {bounds}")
        while True:
            line = _read_line(proc)
            parts = line.split()
            if not parts:
                raise ProtocolError("empty message")
            if parts[0] == "DONE":
                break
            if parts[0] != "ASK":
                raise ProtocolError(f"unexpected message {parts[0]!r}")
            if stopped or ctx.remaining == 0:
                raise ProtocolError("evaluation requested past the budget")
            if len(parts) != 1 + problem.dimension:
                raise ProtocolError(
                    f"ASK carried {len(parts) - 1} coordinates, expected {problem.dimension}"
                )
            x = np.array([float(v) for v in parts[1:]])
            fitness = ctx.evaluate(x)
            send(f"TELL {fitness!r}")
            if ctx.remaining == 0:
                send("STOP")
                stopped = True
    except (ProtocolError, ValueError) as exc:
        proc.kill()
        proc.wait()
        return _failed_trace(problem, method_id, seed, budget, str(exc), ctx)
    finally:
        if proc.poll() is None:
            try:
                proc.stdin.close()
            except OSError:
                pass
            try:
                proc.wait(timeout=10)
            except subprocess.TimeoutExpired:
                proc.kill()
                proc.wait()

    if not ctx.checkpoints:
        return _failed_trace(problem, method_id, seed, budget, "no evaluations performed", ctx)
    return ctx.finish(
        problem_id=problem.id,
        method_id=method_id,
        seed=seed,
        wall_total=time.perf_counter() - t_start,
        budget_truncated=stopped,
    )
