from privsan.timing import loglog_slope, measure


class TestTimingModel:
    def test_rows_and_slopes(self):
        rows = measure([64, 128], m=16, master_seed=0)
        assert len(rows) == 10
        # Linear-in-n mechanisms grow slower than the cubic noise mechanism.
        assert loglog_slope(rows, "asup") > loglog_slope(rows, "nrp")

    def test_fixed_matrix_preprocessing_dominates_per_tuple(self):
        rows = measure([256], m=20, master_seed=1)
        pre = next(r for r in rows if r.mechanism == "brp" and r.phase == "preprocess")
        per = next(r for r in rows if r.mechanism == "brp" and r.phase == "sanitize")
        assert pre.seconds_per_tuple > per.seconds_per_tuple
