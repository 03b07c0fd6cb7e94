import json

from aggmem import crud
from aggmem.schemas import RunCreate, RunResponse


def _run(command="simulate", seed=1):
    return RunCreate(
        command=command,
        spec_json=json.dumps({"family": "uniform"}),
        config_json=json.dumps({"N": 10, "T": 20}),
        seed=seed,
        seed_source="cli",
        n_units=10,
        n_periods=20,
        summary_json=json.dumps({"variance": 1.5}),
    )


def test_record_and_get(ledger):
    stored = crud.record_run(ledger, _run())
    assert stored.id is not None
    fetched = crud.get_run(ledger, stored.id)
    assert fetched.command == "simulate"
    assert fetched.created_at is not None

    response = RunResponse.model_validate(fetched)
    assert response.seed == 1
    assert json.loads(response.summary_json) == {"variance": 1.5}


def test_newest_first_and_filter(ledger):
    for seed in (1, 2, 3):
        crud.record_run(ledger, _run(seed=seed))
    crud.record_run(ledger, _run(command="study", seed=9))

    runs = crud.get_runs(ledger)
    assert [r.seed for r in runs] == [9, 3, 2, 1]
    assert [r.seed for r in crud.get_runs(ledger, command="simulate", limit=2)] == [3, 2]
    assert [r.seed for r in crud.get_runs(ledger, skip=1, limit=1)] == [3]
    assert crud.count_runs(ledger) == 4
    assert crud.count_runs(ledger, command="study") == 1


def test_delete(ledger):
    stored = crud.record_run(ledger, _run())
    assert crud.delete_run(ledger, stored.id)
    assert crud.get_run(ledger, stored.id) is None
    assert not crud.delete_run(ledger, stored.id)
