"""
How much training data is enough?
=================================

Slide a fixed-size window along each trace, train a fresh model per
window, and average the scores per window size. Means rise while extra
history still teaches the model something new, then flatten; the size
where they settle is the training cut-off point.
"""

from prefetchlab import (PredictorConfig, SlidingWindowSpec, bursty_traces,
                         cutoff_scan, run_sweep)

traces = bursty_traces(seed=42, count=40, min_length=520, max_length=600,
                       repertoire_size=25, noise_rate=0.1)
sizes = (25, 50, 100, 200, 300, 400, 500)

result = run_sweep(traces, PredictorConfig(algorithm="naive"),
                   SlidingWindowSpec(window_sizes=sizes))
print(f"{result.model_count} models trained across {len(traces)} users\n")

print("window  models  dynamic recall")
means = {}
for size in sizes:
    cell = result.means[size]["dynamic_recall"]
    models = sum(1 for r in result.records if r.window_size == size)
    means[size] = cell["mean"]
    print(f"{size:>6}  {models:>6}  {cell['mean']:.3f}")

cutoff, trend = cutoff_scan(means, epsilon=0.005)
print(f"\ntrend {trend}; means settle at window size {cutoff}")
print("beyond that, bigger training windows buy nothing: the user's")
print("repertoire is already fully represented")
