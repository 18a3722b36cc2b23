"""Regenerate every hardware table: analytical equations next to the bundled
45 nm post-synthesis calibration rows, plus the prototype scaling ladder.

Usage: python scripts/hw_tables.py
"""

from tnnsim.hwmodel import (AdpReport, COLUMN_SYNTH_45NM, NEURON_SYNTH_45NM,
                            NODES, PROTOTYPE_SYNTH_45NM, delay_and_time,
                            gates_column, gates_neuron, network_report,
                            prototype_spec, scale_adp)


def pct(a, b):
    return 100.0 * (a / b - 1.0)


def main():
    print("neuron gate counts (STDP): analytical vs post-synthesis")
    print(f"{'p':>6} {'analytical':>12} {'synthesis':>12} {'dev%':>7} {'D(gd)':>6}")
    for p, (gates, _a, d_ns, _pw) in NEURON_SYNTH_45NM.items():
        total = gates_neuron(p).total
        print(f"{p:>6} {total:>12,} {gates:>12,} {pct(total, gates):>6.2f}% "
              f"{delay_and_time(p)[0]:>6}")

    print("\ncolumn gate counts: analytical vs post-synthesis")
    print(f"{'mode':>6} {'p':>5} {'q':>3} {'analytical':>12} {'synthesis':>12} {'dev%':>7}")
    for (mode, p, q), (gates, *_rest) in COLUMN_SYNTH_45NM.items():
        total = gates_column(p, q, mode).total
        print(f"{mode:>6} {p:>5} {q:>3} {total:>12,} {gates:>12,} {pct(total, gates):>6.2f}%")

    print("\nprototype network scaling (calibrated 45 nm row)")
    area, t_ns, power = PROTOTYPE_SYNTH_45NM
    base = AdpReport.from_compute_time(area, t_ns, power, "45nm")
    print(f"{'node':>6} {'area mm^2':>10} {'time ns':>8} {'power mW':>9} {'Mfps':>8}")
    for name in NODES:
        r = scale_adp(base, name)
        print(f"{name:>6} {r.area_mm2:>10.2f} {r.compute_time_ns:>8.2f} "
              f"{r.power_mw:>9.2f} {r.throughput_fps / 1e6:>8.1f}")

    rep = network_report(prototype_spec(), "45nm")
    print(f"\nprototype gate totals: analytical {rep.total_gates:,} "
          f"(layers {[g.total for g in rep.layer_gates]}, tally {rep.tally:,})")


if __name__ == "__main__":
    main()
