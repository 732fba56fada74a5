import json
from datetime import datetime
from typing import Dict, Any, List, Optional

import pandas as pd

from errors import ValidationError
from utils import truncate_text


class ReportGenerator:
    """Generates text, JSON and CSV reports of certificates"""

    KINDS = ('height', 'half-grope', 'k-slice')

    def __init__(self, timestamp: Optional[datetime] = None):
        # No timestamp unless asked for, so reports are reproducible
        self.report_timestamp = timestamp

    def _check_kind(self, certificate: Dict[str, Any]) -> str:
        kind = certificate.get('kind')
        if kind not in self.KINDS:
            raise ValidationError(f"Cannot report on certificate kind {kind!r}")
        return kind

    def generate_text_report(self, certificate: Dict[str, Any], source: str) -> str:
        """Generate a sectioned text report of a certificate"""
        kind = self._check_kind(certificate)
        report_lines = []

        # Header
        report_lines.append("=" * 80)
        report_lines.append(f"{kind.upper()} CERTIFICATE REPORT")
        report_lines.append("=" * 80)
        report_lines.append("")

        report_lines.append("INPUT")
        report_lines.append("-" * 30)
        report_lines.append(f"Source: {source}")
        if self.report_timestamp is not None:
            report_lines.append(f"Generated: {self.report_timestamp.strftime('%B %d, %Y at %I:%M %p')}")
        report_lines.append("")

        stats = self.generate_summary_stats(certificate)
        report_lines.append("SUMMARY")
        report_lines.append("-" * 30)
        for key, value in stats.items():
            report_lines.append(f"{key.replace('_', ' ').title()}: {value}")
        report_lines.append("")

        rows = self._rows(certificate)
        if rows:
            report_lines.append("TREES")
            report_lines.append("-" * 30)
            for i, row in enumerate(rows, 1):
                details = ", ".join(f"{k}={v}" for k, v in row.items() if k != 'tree')
                report_lines.append(f"{i}. {truncate_text(row['tree'], 120)}")
                if details:
                    report_lines.append(f"   {details}")
            report_lines.append("")

        if certificate.get('remark'):
            report_lines.append("NOTES")
            report_lines.append("-" * 30)
            report_lines.append(f"• {certificate['remark']}")
            report_lines.append("")

        report_lines.append("=" * 80)
        report_lines.append("END OF REPORT")
        report_lines.append("=" * 80)

        return "\n".join(report_lines)

    def generate_json_report(self, certificate: Dict[str, Any], source: str) -> str:
        """Generate a JSON format report"""
        kind = self._check_kind(certificate)
        metadata = {
            "source": source,
            "report_type": f"{kind}_certificate",
            "version": "1.0",
        }
        if self.report_timestamp is not None:
            metadata["generated_at"] = self.report_timestamp.isoformat()

        report_data = {
            "report_metadata": metadata,
            "summary": self.generate_summary_stats(certificate),
            "certificate": certificate,
        }
        return json.dumps(report_data, indent=2, sort_keys=True, ensure_ascii=False)

    def generate_csv_report(self, certificate: Dict[str, Any]) -> str:
        """Generate a CSV with one row per certified tree"""
        self._check_kind(certificate)
        frame = pd.DataFrame(self._rows(certificate))
        return frame.to_csv(index=False, lineterminator="\n")

    def _rows(self, certificate: Dict[str, Any]) -> List[Dict[str, Any]]:
        kind = certificate['kind']

        if kind == 'height':
            return [
                {
                    'tree': w['tree'],
                    'degree': w['degree'],
                    'ok': w['ok'],
                    'puncture': w['puncture'],
                    'kind': w['kind'],
                }
                for w in certificate.get('witnesses', [])
            ]

        if kind == 'half-grope':
            return [
                {'tree': tree, 'surface': surface}
                for surface, forest in sorted(certificate['result']['bodies'].items())
                for tree in forest
            ]

        rows = []
        for entry in certificate.get('entries', []):
            for root in entry['roots']:
                rows.append({
                    'tree': root['tree'],
                    'source': entry['source'],
                    'label': root['label'],
                    'position': root['position'],
                    'branch_degrees': "/".join(str(d) for d in root['branch_degrees']),
                })
        return rows

    def generate_summary_stats(self, certificate: Dict[str, Any]) -> Dict[str, Any]:
        """Generate summary statistics for a certificate"""
        kind = self._check_kind(certificate)
        rows = self._rows(certificate)

        if kind == 'height':
            return {
                'height': certificate['height'],
                'tower_order': certificate['order'],
                'trees': len(rows),
                'stronger_condition': certificate['stronger_condition'],
            }

        if kind == 'half-grope':
            classes = certificate.get('class', {})
            return {
                'surfaces': len(classes),
                'trees': len(rows),
                'class': min(classes.values()) if classes else None,
                'jacobi_steps': len(certificate.get('steps', [])),
            }

        degrees = [int(d) for row in rows for d in row['branch_degrees'].split("/")]
        return {
            'k': certificate['k'],
            'trees': len(rows),
            'min_branch_degree': min(degrees) if degrees else None,
        }
