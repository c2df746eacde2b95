#include "bildsim/plots.hpp"

#include <algorithm>

namespace bildsim::plots {
namespace {

constexpr const char* kPreamble = R"py(#!/usr/bin/env python3
# Generated by bildsim. Run from this directory: python3 plot.py
import csv
import math
import os

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

HERE = os.path.dirname(os.path.abspath(__file__))


def read(name):
    with open(os.path.join(HERE, name), newline="") as fh:
        return list(csv.DictReader(fh))


def num(row, key):
    value = row.get(key, "")
    return float(value) if value not in ("", None) else math.nan


def save(fig, name):
    fig.tight_layout()
    fig.savefig(os.path.join(HERE, name), dpi=150)
    print("wrote", name)

)py";

constexpr const char* kScatter = R"py(
rows = read("results.csv")
exact = [num(r, "exact") for r in rows]
mc = [num(r, "mc_mean") for r in rows]
err = [num(r, "mc_stderr") for r in rows]
fig, ax = plt.subplots(figsize=(5, 5))
ax.errorbar(exact, mc, yerr=err, fmt="o", capsize=3, label="Monte Carlo")
lo, hi = min(exact + mc), max(exact + mc)
pad = 0.05 * (hi - lo or 1.0)
ax.plot([lo - pad, hi + pad], [lo - pad, hi + pad], "k--", lw=1, label="identity")
for r, x, y in zip(rows, exact, mc):
    ax.annotate(r["quantity"], (x, y), fontsize=7, xytext=(3, 3), textcoords="offset points")
ax.set_xlabel("exact")
ax.set_ylabel("Monte Carlo mean")
ax.legend()
save(fig, "mc_vs_exact.png")
)py";

constexpr const char* kChshSweep = R"py(
rows = read("sweep.csv")
t = [num(r, "t") for r in rows]
fig, ax = plt.subplots(figsize=(6, 4))
ax.plot(t, [abs(num(r, "S_quantum")) for r in rows], label="|S| quantum")
ax.plot(t, [abs(num(r, "S_sphere_sign")) for r in rows], label="|S| sphere-sign hidden variable")
ax.axhline(2.0, color="k", ls="--", lw=1, label="classical bound 2")
ax.axhline(2.0 * math.sqrt(2.0), color="r", ls=":", lw=1, label="2 sqrt 2")
ax.set_xlabel("t  (angles 0, 2t, t, -t)")
ax.set_ylabel("|S|")
ax.legend(fontsize=8)
save(fig, "chsh_sweep.png")
)py";

constexpr const char* kChshPairs = R"py(
rows = read("correlations.csv")
names = [r["pair"] for r in rows]
fig, ax = plt.subplots(figsize=(6, 4))
x = range(len(rows))
ax.bar([i - 0.2 for i in x], [num(r, "empirical") for r in rows], width=0.4, label="empirical")
ax.bar([i + 0.2 for i in x], [num(r, "exact_or_quantum") for r in rows], width=0.4, label="model")
ax.set_xticks(list(x))
ax.set_xticklabels(names)
ax.set_ylabel("correlation")
ax.legend()
save(fig, "correlations.png")
)py";

constexpr const char* kMoments = R"py(
rows = read("moments.csv")
fig, ax = plt.subplots(figsize=(6, 4))
for particle in sorted({r["particle"] for r in rows}):
    sel = [r for r in rows if r["particle"] == particle]
    ax.plot([num(r, "time") for r in sel], [num(r, "x_variance") for r in sel], label="particle " + particle)
ax.set_xlabel("t")
ax.set_ylabel("Var x")
ax.legend()
save(fig, "variance.png")
)py";

constexpr const char* kVelocity = R"py(
rows = read("velocity.csv")
overlay = read("overlay.csv")
for eps in sorted({r["epsilon"] for r in rows}, key=float):
    sel = [r for r in rows if r["epsilon"] == eps]
    x = [num(r, "bin_center") for r in sel]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.errorbar(x, [num(r, "v_plus") for r in sel], yerr=[num(r, "v_plus_err") for r in sel], fmt="o-", ms=3, label="v+")
    ax.errorbar(x, [num(r, "v_minus") for r in sel], yerr=[num(r, "v_minus_err") for r in sel], fmt="s-", ms=3, label="v-")
    ax.set_xlabel("x")
    ax.set_ylabel("velocity")
    ax.set_title("epsilon = " + eps)
    ax.legend()
    save(fig, "velocities_eps_" + eps + ".png")

    sel = [r for r in overlay if r["epsilon"] == eps]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.errorbar([num(r, "mean_position") for r in sel], [num(r, "u") for r in sel],
                yerr=[num(r, "u_err") for r in sel], fmt="o", ms=3, label="u = (v- - v+)/2")
    ax.plot([num(r, "mean_position") for r in sel], [num(r, "kde_u") for r in sel], "-", label="-D d ln P (KDE)")
    ax.set_xlabel("x")
    ax.set_ylabel("osmotic velocity")
    ax.set_title("epsilon = " + eps)
    ax.legend()
    save(fig, "osmotic_eps_" + eps + ".png")
)py";

constexpr const char* kWitness = R"py(
rows = read("witness.csv")
fig, ax = plt.subplots(figsize=(6, 4))
ax.errorbar([num(r, "epsilon") for r in rows], [num(r, "gap") for r in rows],
            yerr=[num(r, "gap_err") for r in rows], fmt="o-")
ax.set_xscale("log")
ax.set_xlabel("epsilon")
ax.set_ylabel("|v+ - v-|")
save(fig, "witness.png")
)py";

constexpr const char* kMomentum = R"py(
rows = read("momentum.csv")
fig, ax = plt.subplots(figsize=(6, 4))
r_eps = [num(r, "epsilon_over_tau_p") for r in rows]
ax.errorbar(r_eps, [num(r, "v_plus") for r in rows], yerr=[num(r, "v_plus_err") for r in rows], fmt="o-", label="v+")
ax.errorbar(r_eps, [num(r, "v_minus") for r in rows], yerr=[num(r, "v_minus_err") for r in rows], fmt="s-", label="v-")
ax.plot(r_eps, [num(r, "p_over_m") for r in rows], "k--", label="p/m")
ax.set_xscale("log")
ax.set_xlabel("epsilon / tau_p")
ax.set_ylabel("velocity in phase-space bin")
ax.legend()
save(fig, "momentum_limit.png")
)py";

bool has(const cli::OutputFiles& files, const std::string& name) {
  return std::any_of(files.begin(), files.end(), [&](const auto& f) { return f.first == name; });
}

}  // namespace

cli::OutputFiles emit_plot_bundle(const std::string& command, const cli::OutputFiles& results) {
  std::string body;
  if (command == "pcsft-average" || command == "pcsft-correlation") {
    body = kScatter;
  } else if (command == "chsh-quantum") {
    if (has(results, "sweep.csv")) body = kChshSweep;
  } else if (command == "chsh-hv") {
    body = kChshPairs;
  } else if (command == "brownian-ctm" || command == "brownian-om") {
    body = kMoments;
  } else if (command == "velocity-field") {
    body = kVelocity;
    if (has(results, "witness.csv")) body += kWitness;
    if (has(results, "momentum.csv")) body += kMomentum;
  }
  if (body.empty()) return {};
  return {{"plot.py", std::string(kPreamble) + body}};
}

}  // namespace bildsim::plots
