"""
Render an acceptance report as Markdown (for a CI step summary or a terminal).
"""

from typing import Any, Dict, List

from clipnoise.pipeline.verify import failed_checks

ICONS = {"pass": "✅", "warn": "⚠️", "fail": "❌"}


def _details(check: Dict[str, Any]) -> str:
    return str(check.get("message", "")).replace("|", "\\|")


def render_markdown(report: Dict[str, Any]) -> str:
    """One header, an overview list and a table row per check."""
    lines: List[str] = []
    lines.append(f"## clipnoise Acceptance Report ({ICONS.get(report.get('status'), '?')} {report.get('status', '?')})")
    lines.append("")

    lines.append("### Overview")
    lines.append(f"- **Version:** {report.get('version', '?')}")
    lines.append(f"- **Sample scale:** {report.get('scale', '?')}")
    lines.append(f"- **Generated:** {report.get('generated_at', '?')}")
    lines.append("")

    lines.append("### Checks")
    lines.append("")
    lines.append("| Check | Status | Details |")
    lines.append("|-------|--------|---------|")
    for check in report.get("checks", []):
        icon = ICONS.get(check["status"], "?")
        lines.append(f"| {check['name']} | {icon} | {_details(check)} |")
    lines.append("")

    failed = failed_checks(report)
    if failed:
        lines.append("### Failed")
        lines.extend(f"- {name}" for name in failed)
        lines.append("")
    return "\n".join(lines)

