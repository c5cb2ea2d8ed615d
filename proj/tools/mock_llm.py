#!/usr/bin/env python3
"""Deterministic stand-in for the model, judge and search endpoints.

Serves every chat request on POST /chat and image search on GET /search.
Replies depend only on the request, so repeated runs produce identical
manifests. Usage: mock_llm.py [--port N] [--fail-every K]
"""
import argparse
import hashlib
import json
import re
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from urllib.parse import parse_qs, urlparse


def user_text(req):
    parts = []
    for m in req.get("messages", []):
        for p in m.get("content", []):
            if p.get("type") == "text":
                parts.append(p["text"])
    return "\n".join(parts)


def digest(s):
    return int(hashlib.sha256(s.encode()).hexdigest(), 16)


def reply_for(req):
    text = user_text(req)
    if "create a leaderboard" in text:
        outs = re.findall(r'"answer": """(.*?)"""', text, re.S)
        first_longer = len(outs) == 2 and len(outs[0]) >= len(outs[1])
        a, b = ("model_1", "model_2") if first_longer else ("model_2", "model_1")
        return f'[{{"model": "{a}", "rank": 1}}, {{"model": "{b}", "rank": 2}}]'
    if "feedback on the performance" in text:
        h = digest(text)
        return "/".join(str(1 + (h >> (8 * i)) % 5) for i in range(4))
    if "specificity of a given text" in text:
        return str(1 + digest(text) % 5)
    if "Can you improve this explanation" in text:
        ctx = re.search(r"Context: (.*)", text)
        return "Refined: " + (ctx.group(1) if ctx else "the scene") + " made the outcome likely."
    shots = sum(1 for m in req.get("messages", []) for p in m.get("content", []) if p.get("type") == "image") - 1
    outcome = re.findall(r"Outcome: (.*)", text)
    last = outcome[-1] if outcome else "it happened"
    detail = " Similar cases point to a hidden detail in the scene." * max(shots, 0)
    return f"Something in the scene was not as it seemed, so {last[0].lower() + last[1:]}{detail}"


class Handler(BaseHTTPRequestHandler):
    fail_every = 0
    count = 0

    def log_message(self, *args):
        pass

    def send(self, code, body):
        data = json.dumps(body).encode()
        self.send_response(code)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)

    def do_GET(self):
        url = urlparse(self.path)
        if url.path == "/search":
            q = parse_qs(url.query).get("q", [""])[0]
            n = int(parse_qs(url.query).get("count", ["5"])[0])
            h = hashlib.sha256(q.encode()).hexdigest()[:8]
            self.send(200, {"results": [{"url": f"https://images.example/{h}/{i}.jpg", "rank": i + 1} for i in range(n)]})
        else:
            self.send(404, {"error": "not found"})

    def do_POST(self):
        body = self.rfile.read(int(self.headers.get("Content-Length", 0)))
        Handler.count += 1
        if Handler.fail_every and Handler.count % Handler.fail_every == 0:
            self.send(503, {"error": "injected failure"})
            return
        self.send(200, {"text": reply_for(json.loads(body))})


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--port", type=int, default=8765)
    ap.add_argument("--fail-every", type=int, default=0)
    args = ap.parse_args()
    Handler.fail_every = args.fail_every
    srv = ThreadingHTTPServer(("127.0.0.1", args.port), Handler)
    print(f"mock listening on {srv.server_address[1]}", flush=True)
    srv.serve_forever()


if __name__ == "__main__":
    main()
