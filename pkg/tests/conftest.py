"""Shared fixtures: a fixed biomedical evaluation triple consisting of
one system summary and two human reference summaries, used by the metric
tests and the acceptance suite."""

from __future__ import annotations

import pytest

SYSTEM_SUMMARY = (
    "Some of the genes in the BCAA metabolic pathway such as MLYCD (rank 164)"
    "HADHB (rank 354)IVD (rank 713)MUT (rank 921)and PCCB (rank 684) are also "
    "ranked highly by Hridaya. The SVMs are based on 181 features broadly "
    "grouped into (1) genetic(2) epigenetic(3) transcriptomic(4) phenotypicand "
    "(5) evolutionary. The genes are PDGFRBABL1FLT1; and these genes are drug "
    "targets of cancer drugs like Dasatinib (targets – PDGFRBABL1)"
    "Pazopanib (targets – PDGFRBFLT1)Ponatinib (target – ABL1)26."
)

REFERENCE_A = (
    "Some BCAA genes such as MLYCD, IVD, MUT and PCCB are ranked highly by "
    "Hridaya using SVM that is based on 181 features. These genes are drug "
    "targets of cancer drugs such as Dasatinib, Pazopanib and Ponatinib."
)

REFERENCE_B = (
    "A few genes in the BCAA metabolic pathway are also ranked highly by "
    "Hridaya and some examples include MUT (rank 921), IVD (rank 713), PCCB "
    "(rank 684), HADHE (rank 354) and MLYCD (rank 164). The SVMs are grouped "
    "into five categories based on 181 features and the categories are; "
    "genetic, epigenetic, transcriptomic, phenotypicand and evolutionary. The "
    "genes are PDGFRBABL1FLT1 and are drug targets of cancer drugs such as "
    "Dasatinib (targets – PDGFRBABL1), Pazopanib (targets – "
    "PDGFRBFLT1) and Ponatinib (target – ABL1)26."
)


@pytest.fixture(scope="session")
def eval_triple() -> tuple[str, str, str]:
    return SYSTEM_SUMMARY, REFERENCE_A, REFERENCE_B
