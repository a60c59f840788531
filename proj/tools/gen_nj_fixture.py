# SPDX-License-Identifier: Apache-2.0
"""Generates the bundled New Jersey fixture (data/nj_cases.csv, data/nj_population.csv).

Deterministic synthetic daily cumulative case counts for the 21 NJ counties
over 2020-04-01 .. 2021-12-28 (637 days, 91 whole weeks), shaped as a sum of
epidemic waves: a decaying spring-2020 tail, a fall-2020 wave peaking in the
fourth week of the third 13-week quarter, a modest spring-2021 bump, a
late-summer-2021 wave, and an exponential rise at the end of 2021. Atlantic
County's first weekly total is pinned to 67 so the per-capita anchor
67 / 274534 = 2.44e-04 holds exactly.
"""

import math
import os
import random

COUNTIES = [
    ("Atlantic", 34001, 274534),
    ("Bergen", 34003, 955732),
    ("Burlington", 34005, 461860),
    ("Camden", 34007, 506471),
    ("Cape May", 34009, 92039),
    ("Cumberland", 34011, 149527),
    ("Essex", 34013, 863728),
    ("Gloucester", 34015, 302294),
    ("Hudson", 34017, 724854),
    ("Hunterdon", 34019, 128947),
    ("Mercer", 34021, 387340),
    ("Middlesex", 34023, 863162),
    ("Monmouth", 34025, 643615),
    ("Morris", 34027, 509285),
    ("Ocean", 34029, 637229),
    ("Passaic", 34031, 524118),
    ("Salem", 34033, 64837),
    ("Somerset", 34035, 345361),
    ("Sussex", 34037, 144221),
    ("Union", 34039, 575345),
    ("Warren", 34041, 109632),
]

WEEKS = 91
DAYS = WEEKS * 7  # 637
START = (2020, 4, 1)


def days_from_civil(y, m, d):
    y -= m <= 2
    era = (y if y >= 0 else y - 399) // 400
    yoe = y - era * 400
    doy = (153 * (m + (-3 if m > 2 else 9)) + 2) // 5 + d - 1
    doe = yoe * 365 + yoe // 4 - yoe // 100 + doy
    return era * 146097 + doe - 719468


def civil_from_days(z):
    z += 719468
    era = (z if z >= 0 else z - 146096) // 146097
    doe = z - era * 146097
    yoe = (doe - doe // 1460 + doe // 36524 - doe // 146096) // 365
    y = yoe + era * 400
    doy = doe - (365 * yoe + yoe // 4 - yoe // 100)
    mp = (5 * doy + 2) // 153
    d = doy - (153 * mp + 2) // 5 + 1
    m = mp + (3 if mp < 10 else -9)
    return (y + (m <= 2), m, d)


def gauss(w, mu, sd):
    return math.exp(-((w - mu) ** 2) / (2.0 * sd * sd))


def per_capita_rate(w):
    rate = 3.2e-4 * math.exp(-w / 5.0)          # spring 2020 tail
    rate += 2.4e-3 * gauss(w, 29, 3.5)          # fall 2020 wave
    if w == 29:
        rate *= 1.18                            # reporting surge at the peak week
    rate += 5.0e-4 * gauss(w, 55, 6.0)          # spring 2021 bump
    rate += 7.0e-4 * gauss(w, 72, 5.0)          # late-summer 2021 wave
    rate += 2.8e-3 * math.exp((w - 93) / 4.0)   # year-end 2021 rise
    return 6.0 * rate                           # keep weekly counts well clear of rounding noise


def weekly_totals(pop, load, rng):
    totals = []
    for w in range(WEEKS):
        jitter = 1.0 + 0.03 * rng.uniform(-1.0, 1.0)
        totals.append(max(0, round(pop * per_capita_rate(w) * load * jitter)))
    return totals


def main():
    here = os.path.dirname(os.path.abspath(__file__))
    data_dir = os.path.join(here, "..", "data")
    os.makedirs(data_dir, exist_ok=True)

    rng = random.Random(20220401)
    start_serial = days_from_civil(*START)

    per_county_cum = {}
    for name, fips, pop in COUNTIES:
        load = 0.75 + 0.6 * rng.random()
        totals = weekly_totals(pop, load, rng)
        if name == "Atlantic":
            # Per-capita anchor week. The jump to the week-2 value doubles as
            # the county's one outsized week-over-week growth spike.
            totals[0] = 67
        base = round(pop * 0.0023 * load)

        inc = [0] * DAYS
        inc[0] = base
        for w in range(WEEKS):
            days = list(range(7 * w + 1, 7 * w + 8))
            days = [d for d in days if d < DAYS]  # final week spreads over 6 days
            q, r = divmod(totals[w], len(days))
            for i, d in enumerate(days):
                inc[d] = q + (1 if i < r else 0)

        cum = []
        running = 0
        for d in range(DAYS):
            running += inc[d]
            cum.append(running)
        per_county_cum[name] = (fips, cum)

    with open(os.path.join(data_dir, "nj_cases.csv"), "w", newline="") as f:
        f.write("date,county,state,fips,cases,deaths\n")
        for d in range(DAYS):
            y, m, dd = civil_from_days(start_serial + d)
            date = f"{y:04d}-{m:02d}-{dd:02d}"
            for name, fips, pop in COUNTIES:
                cum = per_county_cum[name][1][d]
                f.write(f"{date},{name},New Jersey,{fips},{cum},{cum // 60}\n")

    with open(os.path.join(data_dir, "nj_population.csv"), "w", newline="") as f:
        f.write("region,population\n")
        for name, fips, pop in COUNTIES:
            f.write(f"{name},{pop}\n")

    print(f"wrote {DAYS} days x {len(COUNTIES)} counties")


if __name__ == "__main__":
    main()
