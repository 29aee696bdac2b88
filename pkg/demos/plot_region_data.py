"""
Where pure states live
======================

Tables for the reachable (E_AB/E_A(BC), E_AC/E_A(BC)) region and for the
power-mean level curves, written as CSV under ``region_data/`` in the
current directory.
"""

from pathlib import Path

from entmono import monogamy as mg

out = Path("region_data")
out.mkdir(exist_ok=True)

header, rows = mg.eof_curve(points=200)
(out / "eof_curve.csv").write_text(mg.table_csv(header, rows))

report = mg.scan("concurrence_sq", n_samples=1000, seed=0)
header, rows = mg.region_table(report, bound="f_sum")
(out / "region.csv").write_text(mg.table_csv(header, rows))

header, rows = mg.power_mean_curves()
(out / "power_mean.csv").write_text(mg.table_csv(header, rows))
print("wrote", sorted(p.name for p in out.iterdir()))
