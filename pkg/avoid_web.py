#!/usr/bin/env python3
"""
frenet-avoid Web — run browser
Lists simulation runs under OUTPUT_DIR (any folder holding metrics.json) with their
metrics and steering plot, plus the latest sweep summary.
"""
from flask import Flask, render_template_string, jsonify, send_from_directory, abort
import pandas as pd, json, os
from collections import defaultdict
from datetime import datetime, timezone
from pathlib import Path

from avoid_config import output_dir

app = Flask(__name__)

def log(msg):
    print(msg, flush=True)

def runs_root() -> Path:
    return output_dir().resolve()

# === Run discovery ===
def find_runs():
    """Every directory under OUTPUT_DIR with a metrics.json, newest first."""
    root = runs_root()
    if not root.exists():
        return []
    runs = []
    for mfile in root.rglob("metrics.json"):
        try:
            metrics = json.loads(mfile.read_text())
        except (OSError, json.JSONDecodeError) as e:
            log(f"⚠️ could not read {mfile}: {e}")
            continue
        run_dir = mfile.parent
        name = run_dir.relative_to(root).as_posix()
        scenario = {}
        sfile = run_dir / "scenario.json"
        if sfile.exists():
            try:
                scenario = json.loads(sfile.read_text())
            except (OSError, json.JSONDecodeError):
                scenario = {}
        ok = not metrics.get("collision") and not metrics.get("aborted") and metrics.get("completed")
        runs.append({
            "name": name if name != "." else "(root)",
            "path": name,
            "scenario": scenario.get("name", ""),
            "model": scenario.get("depth_model", ""),
            "seed": scenario.get("seed", ""),
            "ok": bool(ok),
            "min_clearance": metrics.get("min_clearance"),
            "max_lateral_error": metrics.get("max_lateral_error"),
            "phases": " → ".join(metrics.get("phase_sequence", [])),
            "has_plot": (run_dir / "steering.svg").exists(),
            "mtime": mfile.stat().st_mtime,
        })
    runs.sort(key=lambda r: (-r["mtime"], r["path"]))
    return runs

# === Sweep summary ===
def sweep_summary():
    """Output/sweep.csv → per case/model collision-free share."""
    path = runs_root() / "sweep.csv"
    if not path.exists():
        return []
    try:
        df = pd.read_csv(path)
    except Exception:
        return []
    if df.empty:
        return []
    agg = defaultdict(lambda: {"ok": 0, "runs": 0})
    for _, r in df.iterrows():
        key = (int(r["case"]), str(r["model"]))
        agg[key]["runs"] += 1
        if not bool(r["collision"]) and not bool(r["aborted"]):
            agg[key]["ok"] += 1
    data = [{"case": c, "model": m, "ok": v["ok"], "runs": v["runs"], "pct": round(100 * v["ok"] / v["runs"], 1)}
            for (c, m), v in agg.items()]
    data.sort(key=lambda x: (x["case"], x["model"]))
    return data

def sweep_html():
    data = sweep_summary()
    if not data:
        return "No sweep yet."
    html = ["<div style='display:flex;flex-wrap:wrap;justify-content:center;gap:10px;'>"]
    for row in data:
        bar = f"<div style='width:{row['pct']}%;background:#238636;height:6px;border-radius:3px;'></div>"
        html.append(
            f"<div style='padding:6px 10px;background:#161b22;border:1px solid #30363d;border-radius:8px;text-align:center;min-width:100px;'>"
            f"<b>case {row['case']} · {row['model']}</b><br>"
            f"<small>{row['ok']}/{row['runs']} clean ({row['pct']}%)</small>"
            f"{bar}</div>"
        )
    html.append("</div>")
    return "".join(html)

# === Template ===
TEMPLATE = """
<!doctype html>
<html>
<head>
<meta charset="utf-8">
<title>frenet-avoid runs</title>
<style>
body{background:#0d1117;color:#c9d1d9;font-family:system-ui,Segoe UI,Roboto,Arial;margin:0;padding:0;}
h1{color:#58a6ff;text-align:center;padding:20px 0;margin:0;}
.updated{text-align:center;font-size:.9rem;color:#8b949e;margin-top:-10px}
.grid{display:grid;grid-template-columns:repeat(auto-fit,minmax(420px,1fr));max-width:1400px;margin:20px auto 40px;gap:14px;padding:0 20px}
.card{background:#161b22;border:1px solid #30363d;border-radius:8px;padding:16px}
.run-title{color:#58a6ff;font-weight:700;margin-bottom:6px;font-size:1rem}
.ok{color:#3fb950}.bad{color:#f85149}
.meta{font-size:.9rem;color:#8b949e}
.card img{width:100%;background:white;border-radius:4px;margin-top:8px}
.perfbar{text-align:center;background:#161b22;color:#79c0ff;font-size:1rem;padding:10px 0;border-bottom:1px solid #30363d}
.footer{max-width:1400px;margin:0 auto 30px;color:#8b949e;font-size:.9rem;padding:10px 20px;text-align:center}
</style>
</head>
<body>
<div class="perfbar">{{ sweep_html|safe }}</div>
<h1>🚗 frenet-avoid runs</h1>
<div class="updated">{{ root }}</div>
<div class="grid">
{% for r in runs %}
  <div class="card">
    <div class="run-title">
      {{ r.name }}
      <span style="float:right" class="{{ 'ok' if r.ok else 'bad' }}">{{ '✅' if r.ok else '❌' }}</span>
    </div>
    <div class="meta">
      {{ r.scenario }} · {{ r.model }} · seed {{ r.seed }}<br>
      min clearance: {{ r.min_clearance if r.min_clearance is not none else 'n/a' }} m |
      max lateral error: {{ r.max_lateral_error }} m<br>
      {{ r.phases }}
    </div>
    {% if r.has_plot %}<img src="/runs/{{ r.path }}/steering.svg" alt="steering">{% endif %}
  </div>
{% endfor %}
</div>
<div class="footer">{{ footer_text }}</div>
</body></html>
"""

# === Routes ===
@app.route("/")
def index():
    runs = find_runs()
    return render_template_string(
        TEMPLATE,
        runs=runs,
        root=str(runs_root()),
        footer_text=f"Showing {len(runs)} runs",
        sweep_html=sweep_html(),
    )

@app.route("/runs/<path:name>/steering.svg")
def steering_svg(name):
    root = runs_root()
    run_dir = (root / name).resolve()
    if root != run_dir and root not in run_dir.parents:
        abort(404)
    if not (run_dir / "steering.svg").exists():
        abort(404)
    return send_from_directory(run_dir, "steering.svg", mimetype="image/svg+xml")

@app.route("/api/status")
def api_status():
    runs = find_runs()
    return jsonify({
        "status": "ok",
        "runs": len(runs),
        "clean": sum(r["ok"] for r in runs),
        "output_dir": str(runs_root()),
        "last_updated": datetime.now(timezone.utc).isoformat(),
        "sweep": sweep_summary(),
    })

@app.route("/api/runs")
def api_runs():
    runs = find_runs()
    if not runs:
        return jsonify({"message": "no runs yet", "runs": []})
    return jsonify({"runs": [{k: v for k, v in r.items() if k != "mtime"} for r in runs]})

if __name__ == "__main__":
    app.run(host="0.0.0.0", port=int(os.getenv("PORT", "10000")))
