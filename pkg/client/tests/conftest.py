import signal
import socket
import subprocess
import sys
import time

import pytest
import requests


@pytest.fixture(scope="session")
def service_url(tmp_path_factory):
    """Run the real scoring service in a subprocess for the session."""
    with socket.socket() as probe:
        probe.bind(("127.0.0.1", 0))
        port = probe.getsockname()[1]
    cache_dir = tmp_path_factory.mktemp("embed-cache")
    proc = subprocess.Popen(
        [
            sys.executable,
            "-m",
            "redtrace.cli",
            "serve",
            "--port",
            str(port),
            "--cache-dir",
            str(cache_dir),
        ],
        stdout=subprocess.PIPE,
        stderr=subprocess.PIPE,
    )
    base = f"http://127.0.0.1:{port}"
    deadline = time.monotonic() + 30
    while time.monotonic() < deadline:
        try:
            if requests.get(f"{base}/v1/health", timeout=1).status_code == 200:
                break
        except requests.RequestException:
            if proc.poll() is not None:
                raise RuntimeError(
                    f"service process died: {proc.stderr.read().decode()[:500]}"
                )
            time.sleep(0.2)
    else:
        proc.kill()
        raise RuntimeError("service did not become healthy in time")

    yield base

    proc.send_signal(signal.SIGINT)
    try:
        proc.wait(timeout=15)
    except subprocess.TimeoutExpired:
        proc.kill()
        proc.wait()
