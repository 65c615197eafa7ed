"""Command-line interface: parsing, config files, exit codes, output formats."""

import pytest

from fkramers import ConfigError, SolverFailure
from fkramers.cli import RunConfig, main, parse, render
from fkramers.study import DEFAULT_INV_TAUS, DEFAULT_RESOLUTIONS


class TestParse:
    def test_solve_defaults(self):
        config = parse(["solve"])
        assert config.command == "solve"
        assert config.problem == "ex1a"
        assert config.n == 16 and config.k == 1
        assert config.tau == 0.01 and config.t_final == 1.0
        assert config.theta == 1.0 and config.fmt == "csv"
        assert config.alpha is None and config.out is None

    def test_study_space_defaults(self):
        config = parse(["study-space"])
        assert config.problem == "ex2"  # only problem with an exact solution
        assert config.n_list == DEFAULT_RESOLUTIONS
        assert config.tau == 0.01

    def test_study_space_higher_degree_step(self):
        assert parse(["study-space", "--k", "2"]).tau == 0.005

    def test_stability_defaults(self):
        config = parse(["stability"])
        assert config.n == 8 and config.tau == 0.02 and config.trials == 10

    def test_cq_weights_defaults(self):
        config = parse(["cq-weights"])
        assert config.tau == 1.0 and config.steps == 10

    def test_regularity_problem_default(self):
        assert parse(["regularity"]).problem == "ex1b"
        assert parse(["regularity", "--problem", "ex1c"]).problem == "ex1c"

    def test_study_time_keeps_problem(self):
        config = parse(["study-time", "--problem", "ex1b"])
        assert config.problem == "ex1b"
        assert config.inv_taus == DEFAULT_INV_TAUS

    def test_flag_overrides(self):
        config = parse(["solve", "--N", "4", "--tau", "0.05", "--theta", "2.5", "--k", "2"])
        assert config.n == 4 and config.tau == 0.05
        assert config.theta == 2.5 and config.k == 2

    def test_list_flags(self):
        config = parse(["study-space", "--N-list", "2,4,8"])
        assert config.n_list == (2, 4, 8)
        config = parse(["study-time", "--tau-list", "10,20"])
        assert config.inv_taus == (10, 20)

    def test_missing_command_rejected(self):
        with pytest.raises(ConfigError):
            parse([])

    def test_invalid_values_rejected(self):
        with pytest.raises(ConfigError):
            parse(["solve", "--k", "0"])
        with pytest.raises(ConfigError):
            parse(["solve", "--tau", "-0.1"])
        with pytest.raises(ConfigError):
            parse(["solve", "--theta", "0"])
        with pytest.raises(ConfigError):
            parse(["study-space", "--N-list", "0,4"])


class TestConfigFile:
    def test_render_parse_round_trip(self):
        config = parse([
            "study-time", "--problem", "ex1b", "--alpha", "0.4", "--N", "8",
            "--tau-list", "10,20,40", "--format", "markdown",
        ])
        import tempfile, os

        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "case.cfg")
            with open(path, "w") as handle:
                handle.write(render(config))
            again = parse([config.command, "--config", path])
        assert again == config

    def test_comments_and_blanks_tolerated(self, tmp_path):
        path = tmp_path / "c.cfg"
        path.write_text("# sweep setup\n\nn = 4  # coarse\ntau = 0.25\n")
        config = parse(["solve", "--config", str(path)])
        assert config.n == 4 and config.tau == 0.25

    def test_flags_override_file(self, tmp_path):
        path = tmp_path / "c.cfg"
        path.write_text("tau = 0.5\nn = 4\n")
        config = parse(["solve", "--config", str(path), "--tau", "0.25"])
        assert config.tau == 0.25 and config.n == 4

    def test_unknown_key_named(self, tmp_path):
        path = tmp_path / "c.cfg"
        path.write_text("n = 4\nfoo = 1\n")
        with pytest.raises(ConfigError, match=r"'foo'.*line 2"):
            parse(["solve", "--config", str(path)])

    def test_malformed_value_named(self, tmp_path):
        path = tmp_path / "c.cfg"
        path.write_text("n = abc\n")
        with pytest.raises(ConfigError, match=r"'abc' for key 'n'"):
            parse(["solve", "--config", str(path)])

    def test_conflicting_command_rejected(self, tmp_path):
        path = tmp_path / "c.cfg"
        path.write_text("command = solve\n")
        with pytest.raises(ConfigError, match="conflicting command"):
            parse(["study-time", "--config", str(path)])

    def test_matching_command_accepted(self, tmp_path):
        path = tmp_path / "c.cfg"
        path.write_text("command = solve\nn = 2\n")
        assert parse(["solve", "--config", str(path)]).n == 2

    def test_missing_file_rejected(self):
        with pytest.raises(ConfigError, match="cannot read"):
            parse(["solve", "--config", "/nonexistent/path.cfg"])

    def test_not_key_value_rejected(self, tmp_path):
        path = tmp_path / "c.cfg"
        path.write_text("just some words\n")
        with pytest.raises(ConfigError, match="key = value"):
            parse(["solve", "--config", str(path)])


class TestMain:
    def test_no_arguments_exit_two(self, capsys):
        assert main([]) == 2
        assert "command is required" in capsys.readouterr().err

    def test_bad_order_exit_two(self, capsys):
        assert main(["solve", "--alpha", "1.5"]) == 2
        err = capsys.readouterr().err
        assert "configuration error" in err and "alpha" in err

    def test_solver_failure_exit_three(self, capsys, monkeypatch):
        def boom(*args, **kwargs):
            raise SolverFailure("synthetic breakdown")

        monkeypatch.setattr("fkramers.cli.run", boom)
        assert main(["solve", "--N", "2", "--tau", "0.5"]) == 3
        assert "solver failure" in capsys.readouterr().err

    def test_runtime_precondition_exit_four(self, capsys):
        # a 3-cell mesh misses the jump line of ex1c at x = 0.5
        code = main(["study-time", "--problem", "ex1c", "--alpha", "0.5",
                     "--N", "3", "--tau-list", "2,4"])
        assert code == 4
        assert "precondition violated" in capsys.readouterr().err

    def test_projection_dump_at_time_zero(self, capsys):
        assert main(["solve", "--N", "2", "--T", "0"]) == 0
        out = capsys.readouterr().out
        lines = out.strip().split("\n")
        assert lines[0] == "i,j,mode_a,mode_b,coefficient"
        assert len(lines) == 1 + 2 * 2 * 2 * 2

    def test_ex2_note_on_stderr(self, capsys):
        assert main(["solve", "--problem", "ex2", "--N", "2", "--T", "0"]) == 0
        assert "(t**alpha + 1)" in capsys.readouterr().err

    def test_cq_weights_values(self, capsys):
        assert main(["cq-weights", "--alpha", "0.5", "--tau", "1", "--steps", "3"]) == 0
        lines = capsys.readouterr().out.strip().split("\n")
        assert lines == [
            "j,d_j,partial_sum",
            "0,1.000E+00,1.000E+00",
            "1,-5.000E-01,5.000E-01",
            "2,-1.250E-01,3.750E-01",
            "3,-6.250E-02,3.125E-01",
        ]

    def test_stability_output_and_determinism(self, capsys, tmp_path):
        argv = ["stability", "--N", "2", "--tau", "0.25", "--trials", "2",
                "--seed", "3", "--alpha", "0.5"]
        f1, f2 = str(tmp_path / "a.csv"), str(tmp_path / "b.csv")
        assert main(argv + ["--out", f1]) == 0
        assert main(argv + ["--out", f2]) == 0
        b1 = open(f1, "rb").read()
        assert b1 == open(f2, "rb").read()
        assert b1.decode().split("\n")[0] == "alpha,trial,ratio"
        assert "observed stability constant:" in capsys.readouterr().err

    def test_study_time_stacked_csv(self, capsys):
        assert main(["study-time", "--problem", "ex1a", "--N", "2",
                     "--tau-list", "2,4"]) == 0
        lines = capsys.readouterr().out.strip().split("\n")
        assert lines[0] == "alpha,resolution,error,rate"
        # three default orders for this problem, two resolutions each
        assert len(lines) == 1 + 3 * 2
        assert lines[1].startswith("0.3,2,")
        assert lines[2].startswith("0.3,4,")

    def test_study_time_markdown(self, capsys):
        assert main(["study-time", "--problem", "ex1a", "--alpha", "0.5",
                     "--N", "2", "--tau-list", "2,4", "--format", "markdown"]) == 0
        out = capsys.readouterr().out
        assert "1/tau | 2 | 4 |" in out
        assert "| rate |" in out

    def test_regularity_report(self, capsys):
        assert main(["regularity", "--N", "2", "--tau", "0.125", "--alpha", "0.5"]) == 0
        captured = capsys.readouterr()
        assert captured.out.startswith("n,t,difference_quotient\n")
        assert "fitted decay slope:" in captured.err

    def test_output_file_instead_of_stdout(self, capsys, tmp_path):
        path = tmp_path / "w.csv"
        assert main(["cq-weights", "--steps", "2", "--out", str(path)]) == 0
        assert capsys.readouterr().out == ""
        assert path.read_text().startswith("j,d_j,partial_sum")

    def test_help_exits_zero(self):
        assert main(["--help"]) == 0


class TestRunConfig:
    def test_frozen(self):
        config = RunConfig(command="solve")
        with pytest.raises(Exception):
            config.n = 3

    def test_render_skips_unset_optionals(self):
        text = render(RunConfig(command="solve"))
        assert "alpha" not in text
        assert "command = solve" in text
