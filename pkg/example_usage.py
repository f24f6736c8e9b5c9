"""
Example script demonstrating how to use the matrix factorization API
"""
import json
import sys
import time

import requests

# API base URL (change this to your deployed URL)
API_URL = "http://localhost:5000"

RING = {
    "field": {"kind": "rationals"},
    "variables": ["x"],
    "weights": [1],
    "potential": "x^2"
}
GROUP = {"cyclic": 2, "generator": "s", "action": {"s": {"x": "-x"}}}


def sign_object(m0, m1):
    return {
        "p0": [0], "p1": [1],
        "A": [["x"]], "B": [["x"]],
        "action": {"s": {"p0": [[m0]], "p1": [[m1]]}}
    }


def post(path, body):
    response = requests.post(f"{API_URL}{path}", json=body)
    data = response.json()
    if response.status_code >= 400:
        print(f"✗ {path}: {data.get('error_code')}: {data.get('error')}")
        return None
    return data


def validate_objects():
    """Both sign structures on (x, x) are valid; equal signs are not"""
    print("\nValidating sign structures on (x, x) over x^2...")
    for m0, m1 in (("1", "-1"), ("-1", "1"), ("1", "1")):
        data = post("/api/objects/validate", {"ring": RING, "group": GROUP, "object": sign_object(m0, m1)})
        if data is not None:
            status = "valid" if data["ok"] else f"invalid ({data['violation']})"
            print(f"  M0 = {m0}, M1 = {m1}: {status}")


def stable_homs():
    print("\nStable Hom dimensions...")
    plus, minus = sign_object("1", "-1"), sign_object("-1", "1")
    for name, target in (("plus -> plus", plus), ("plus -> minus", minus)):
        data = post("/api/objects/stable-hom", {"ring": RING, "group": GROUP, "source": plus, "target": target})
        if data is not None:
            print(f"  {name}: {data['dimension']}")


def run_task(problem_path, task):
    """Start a task as a background job, wait for it, then verify its report"""
    print(f"\nRunning task '{task}' from {problem_path}...")
    with open(problem_path, 'r', encoding='utf-8') as f:
        problem = json.load(f)
    started = post("/api/tasks/run", {"problem": problem, "task": task})
    if started is None:
        return False

    job_id = started["job_id"]
    while True:
        job = requests.get(f"{API_URL}/api/tasks/{job_id}").json()
        if job["status"] in ("completed", "failed", "cancelled"):
            break
        time.sleep(0.5)
    if job["status"] != "completed":
        print(f"✗ Job {job['status']}: {job['message']}")
        return False

    report = job["result"]["report"]
    print(f"  summary: {json.dumps(report['summary'], sort_keys=True)}")
    verification = post("/api/reports/verify", report)
    ok = verification is not None and verification["ok"]
    print(f"  {'✓' if ok else '✗'} {verification['checked'] if verification else 0} claims checked")
    return ok


if __name__ == "__main__":
    print("Equivariant Matrix Factorization API - Example Usage")
    print("=" * 50)

    try:
        health = requests.get(f"{API_URL}/health")
        if health.status_code != 200:
            print("✗ API health check failed")
            sys.exit(1)
    except requests.exceptions.RequestException as e:
        print(f"✗ Connection error: {e}")
        print(f"  Make sure the API is running at {API_URL}")
        sys.exit(1)

    validate_objects()
    stable_homs()
    ok = run_task("presets/a1_sign_action.json", "decompose_induced")
    sys.exit(0 if ok else 1)
