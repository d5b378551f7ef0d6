import json
import math
import os
import subprocess

import pytest

import strainsplit as ss


def test_witness_votes():
    sites = [(5, 6), (2, 9)]
    assert ss.assign_binomial(sites) == "minor"
    assert ss.assign_gaussian_vote(sites) == "major"
    assert ss.assign_binomial([(4, 8)]) == "major"


def test_chi2():
    assert ss.chi2_quantile(0.05) == pytest.approx(3.841459, abs=1e-6)
    assert ss.chi2_sf(ss.chi2_quantile(0.2)) == pytest.approx(0.2, abs=1e-12)
    with pytest.raises(ValueError):
        ss.chi2_quantile(1.5)


def test_site_likelihoods():
    site = ss.SiteFeature(0, [6, 0, 0, 2])
    assert list(site.percent) == [75.0, 0.0, 0.0, 25.0]
    assert ss.log_likelihood_h0([site], 0.01) == pytest.approx(math.log(28 * 1e-4 * 0.97**6))
    assert ss.log_likelihood_h1([site], 0.5, 1e-12) == pytest.approx(math.log(28 / 256), abs=1e-9)


def test_parse_and_pileup():
    text = "@SQ\tSN:c\tLN:10\n" + "".join(
        f"r{i}\t0\tc\t1\t60\t4M\t*\t0\t0\t{'ACGT' if i < 6 else 'ACTT'}\tIIII\n" for i in range(8)
    )
    reads = ss.parse_sam(text)
    assert len(reads) == 8
    sites = ss.feature_vectors(reads, 10)
    third = [s for s in sites if s.position == 2][0]
    assert third.depth == 8
    assert list(third.percent) == [0.0, 0.0, 75.0, 25.0]
    with pytest.raises(ss.ParseError):
        ss.parse_sam("a\t0\tc\t1\t60\t4Q\t*\t0\t0\tACGT\tIIII\n")


def test_mixture_and_metrics():
    values = [70.0 + (i % 7) - 3 for i in range(60)] + [30.0 + (i % 5) - 2 for i in range(60)]
    model = ss.em_fit(values, K=2, seed=1)
    est = ss.proportions(model, 2)
    assert est[0] == pytest.approx(0.7, abs=0.02)
    assert ss.rmse([0.7, 0.9, 0.95], [0.72, 0.88, 0.84]) == pytest.approx(0.0655, abs=1e-4)
    _, auc = ss.roc_auc([3, 2, 1, 0], [True, True, False, False])
    assert auc == 1.0


def test_simulate_detect_separate(tmp_path):
    out = tmp_path / "s"
    ss.simulate(str(out), ref_length=20000, proportions=[0.7, 0.3], seed=5)
    truth = json.loads((out / "truth.json").read_text())
    assert len(truth["strain_genomes"]) == 2
    report = ss.detect(str(out / "reads.sam"), str(out / "reference.fasta"), str(out))
    assert report["call"] == "mixed"
    assert report["em_proportions"][0] == pytest.approx(0.7, abs=0.05)
    sep = ss.separate(str(out / "reads.sam"), str(out / "reference.fasta"), str(out))
    assert sep["n_assigned_reads"] > 0
    assert (out / "reads.strain0.sam").exists() and (out / "reads.strain1.sam").exists()
    summary = ss.evaluate(str(tmp_path), str(tmp_path / "eval"))
    assert summary["samples"][0]["sample_id"] == "reads"


@pytest.mark.skipif("STRAINSPLIT_CLI" not in os.environ, reason="CLI path not provided")
def test_cli(tmp_path):
    cli = os.environ["STRAINSPLIT_CLI"]
    sim = subprocess.run([cli, "simulate", "--ref-length", "10000", "--strains", "1", "--proportions", "1",
                          "--error-rate", "0.01", "--seed", "3", "--out", str(tmp_path)], capture_output=True, text=True)
    assert sim.returncode == 0, sim.stderr
    det = subprocess.run([cli, "detect", str(tmp_path / "reads.sam"), str(tmp_path / "reference.fasta"),
                          "--out", str(tmp_path)], capture_output=True, text=True)
    assert det.returncode == 0, det.stderr
    assert json.loads((tmp_path / "report.json").read_text())["call"] == "pure"
    bad = subprocess.run([cli, "detect", "--alpha", "2"], capture_output=True, text=True)
    assert bad.returncode != 0
    assert bad.stderr.startswith("error:")
