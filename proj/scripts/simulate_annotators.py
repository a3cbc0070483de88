# Copyright 2026 The FGResQ Authors. All Rights Reserved.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#    http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Drives the annotation HTTP service with simulated annotators.

Annotators prefer the image with the higher normalized score in the manifest.
One annotator per group dissents on its first few pairs so the expert queue
is exercised; the expert then resolves every disagreement from the scores.
"""

import argparse
import json
import sys
import urllib.error
import urllib.request


def call(base, token, method, path, body=None):
    data = None if body is None else json.dumps(body).encode()
    req = urllib.request.Request(base + path, data=data, method=method)
    req.add_header("Authorization", "Bearer " + token)
    if data is not None:
        req.add_header("Content-Type", "application/json")
    try:
        with urllib.request.urlopen(req, timeout=30) as res:
            payload = res.read()
            return res.status, json.loads(payload) if payload else None
    except urllib.error.HTTPError as e:
        return e.code, json.loads(e.read() or b"{}")


def load_scores(manifest):
    scores = {}
    with open(manifest) as f:
        for line in f:
            rec = json.loads(line)
            if rec.get("record") == "image" and rec.get("mos_norm") is not None:
                scores[rec["image_id"]] = rec["mos_norm"]
    return scores


def better(scores, pair):
    a, b = scores[pair["image_a"]], scores[pair["image_b"]]
    return "A" if a > b else ("B" if b > a else "equal")


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--port", type=int, required=True)
    parser.add_argument("--manifest", required=True)
    parser.add_argument("--annotators", required=True)
    parser.add_argument("--dissent", type=int, default=2)
    args = parser.parse_args()

    base = "http://127.0.0.1:%d" % args.port
    scores = load_scores(args.manifest)
    with open(args.annotators) as f:
        team = json.load(f)

    status, _ = call(base, "not-a-token", "GET", "/session")
    if status != 401:
        sys.exit("expected 401 for an unknown token, got %d" % status)

    submitted = 0
    seen_groups = set()
    for person in team:
        if person["role"] != "annotator":
            continue
        dissent = 0 if person["group"] in seen_groups else args.dissent
        seen_groups.add(person["group"])
        while True:
            status, pair = call(base, person["token"], "GET", "/pairs/next")
            if status == 204:
                break
            choice = better(scores, pair)
            if dissent > 0:
                choice = {"A": "B", "B": "A", "equal": "A"}[choice]
                dissent -= 1
            status, _ = call(base, person["token"], "POST", "/preferences",
                             {"pair_id": pair["pair_id"], "choice": choice})
            if status != 201:
                sys.exit("submit failed with %d" % status)
            submitted += 1

    resolved = 0
    for person in team:
        if person["role"] != "expert":
            continue
        while True:
            status, pair = call(base, person["token"], "GET", "/pairs/next")
            if status == 204:
                break
            status, _ = call(base, person["token"], "POST", "/resolutions",
                             {"pair_id": pair["pair_id"], "final_choice": better(scores, pair),
                              "rationale": "matches the reference scores"})
            if status != 201:
                sys.exit("resolve failed with %d" % status)
            resolved += 1

    print("submitted %d preferences, resolved %d disagreements" % (submitted, resolved))


if __name__ == "__main__":
    main()
