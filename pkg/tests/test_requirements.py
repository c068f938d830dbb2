import re
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent

# requirement -> module the code imports; None for packages pulled in indirectly
# (python-dotenv through pydantic-settings, httpx through fastapi.testclient)
MODULES = {
    "numpy": "numpy",
    "pandas": "pandas",
    "pydantic": "pydantic",
    "pydantic-settings": "pydantic_settings",
    "python-dotenv": None,
    "fastapi": "fastapi",
    "uvicorn": "uvicorn",
    "httpx": None,
    "rich": "rich",
    "pytest": "pytest",
}


def requirement_names():
    names = []
    for line in (ROOT / "requirements.txt").read_text(encoding="utf-8").splitlines():
        line = line.split("#")[0].strip()
        if line:
            names.append(re.split(r"[<>=\[ ;]", line)[0].lower())
    return names


def source_text():
    this = Path(__file__).resolve()
    return "\n".join(
        path.read_text(encoding="utf-8")
        for path in ROOT.rglob("*.py")
        if "examples" not in path.relative_to(ROOT).parts and path.resolve() != this
    )


def test_every_requirement_is_known():
    assert set(requirement_names()) == set(MODULES)


def test_every_direct_requirement_is_imported():
    text = source_text()
    for name in requirement_names():
        module = MODULES[name]
        if module is not None:
            assert re.search(rf"^\s*(import|from) {module}\b", text, re.M), name


def test_no_code_imports_typing_backports():
    assert not re.search(r"^\s*(import|from) typing_extensions\b", source_text(), re.M)
