"""Precompute the acceptance-suite maps into resumable checkpoints."""
import time
from lzsweep.sweep import GridSpec, run_map

t0 = time.time()
pop = run_map(GridSpec(), "population", workers=1,
              checkpoint="/root/pkg/.map_cache/pop120.ckpt")
print("population map done:", pop.manifest, flush=True)
cur = run_map(GridSpec(gamma_count=60, m_count=60), "current", workers=1,
              checkpoint="/root/pkg/.map_cache/cur60.ckpt")
print("current map done:", cur.manifest, flush=True)
print("total wall", time.time() - t0, flush=True)
