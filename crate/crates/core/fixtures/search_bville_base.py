"""Construction of bville_base.csv.

Hill-climbs a 30-bin lead-time shape (leads 1..=30) so that

* its own statistics sit near mean 12.38, median 8, SD 9.42, and a cumulative
  share of about 0.69 at window position 17, and
* half-normal perturbation (sigma 0.05, then renormalization) lands inside every
  year-over-year band as often as possible: |mean change| < 5%, unchanged
  median, |SD change| < 6%, L1 distance in [0.18, 0.25], and a mid-window
  pickup error in [-15%, -10%].

The noise is drawn once with a fixed numpy seed so scores are comparable across
candidates. Output is rounded to 4 decimals and written as `lead,mass`; the
rounded vector was rescaled by hand so it sums to exactly 1. The pinned
perturbation seed is then chosen in Rust with
`cargo run --release --example search_bville_seed`.

Requires numpy.
"""

import sys

import numpy as np

LEADS = np.arange(1, 31)
SIGMA = 0.05
DRAWS = 20000
ITERATIONS = 8000
MID = 16  # zero-based index of window position 17


def stats(m):
    mean = (LEADS * m).sum()
    sd = np.sqrt(((LEADS - mean) ** 2 * m).sum())
    c = np.cumsum(m)
    median = LEADS[np.argmax(c >= 0.5 - 1e-12)]
    return mean, median, sd, c


def band_hits(m, noise):
    mean, median, sd, c = stats(m)
    out = m + noise
    out /= out.sum(1, keepdims=True)
    l1 = 0.5 * np.abs(out - m).sum(1)
    means = out @ LEADS
    sds = np.sqrt(((LEADS[None, :] - means[:, None]) ** 2 * out).sum(1))
    cum = np.cumsum(out, 1)
    medians = LEADS[np.argmax(cum >= 0.5 - 1e-12, axis=1)]
    err = cum[:, MID] / c[MID] - 1
    return [
        np.abs(means / mean - 1) < 0.05,
        medians == median,
        np.abs(sds / sd - 1) < 0.06,
        (l1 >= 0.18) & (l1 <= 0.25),
        (err <= -0.10) & (err >= -0.15),
    ]


def score(m, noise):
    mean, median, sd, c = stats(m)
    penalty = max(0, abs(mean / 12.38066 - 1) - 0.04) * 100
    penalty += max(0, abs(sd / 9.417028 - 1) - 0.04) * 100
    penalty += (median != 8) * 5 + max(0, abs(c[MID] - 0.69) - 0.015) * 100
    hits = band_hits(m, noise)
    joint = np.logical_and.reduce(hits).mean()
    soft = sum(np.log(h.mean() + 1e-4) for h in hits)
    return joint * 100 + soft - penalty, joint


def main():
    rng = np.random.default_rng(1)
    noise = np.abs(rng.normal(0, SIGMA, (DRAWS, 30)))
    # start: heavy early block, thin middle, long-lead shoulder
    m = np.full(30, 1e-3)
    m[:8] = 0.6 / 8
    m[8:17] = 0.09 / 9
    m[17:] = 0.31 / 13
    theta = np.log(m)
    best, joint = score(m, noise)
    for it in range(ITERATIONS):
        step = rng.normal(0, 0.1, 30) * (rng.random(30) < 0.3)
        cand = np.exp(theta + step)
        cand /= cand.sum()
        s, j = score(cand, noise)
        if s >= best:
            theta, best, joint = theta + step, s, j
        if it % 500 == 0:
            print(f"iteration {it}: score {best:.3f}, joint pass rate {joint:.2e}", file=sys.stderr)
    m = np.exp(theta)
    m /= m.sum()
    print("lead,mass")
    for lead, v in zip(LEADS, np.round(m, 4)):
        print(f"{lead},{v}")


if __name__ == "__main__":
    main()
