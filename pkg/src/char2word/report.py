"""Training reports: tab-separated epoch logs plus rendered training curves."""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

LOG_COLUMNS = ("epoch", "train_loss", "dev_metric", "seconds", "words_per_sec")


def write_epoch_log(path, history):
    """One tab-separated line per epoch: epoch, train loss, dev metric,
    seconds, words/sec."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# " + "\t".join(LOG_COLUMNS) + "\n")
        for row in history:
            fh.write("%d\t%.6f\t%.6f\t%.3f\t%.1f\n"
                     % (row.epoch, row.train_loss, row.dev_metric,
                        row.seconds, row.words_per_sec))


def render_training_curves(history, png_path, metric_label):
    """Train-loss and dev-metric curves, written next to the epoch log."""
    epochs = [row.epoch for row in history]
    fig, (ax_loss, ax_metric) = plt.subplots(1, 2, figsize=(9, 3.5))
    ax_loss.plot(epochs, [row.train_loss for row in history], marker="o")
    ax_loss.set_xlabel("epoch")
    ax_loss.set_ylabel("train loss")
    ax_metric.plot(epochs, [row.dev_metric for row in history],
                   marker="o", color="tab:orange")
    ax_metric.set_xlabel("epoch")
    ax_metric.set_ylabel(metric_label)
    fig.tight_layout()
    fig.savefig(png_path, dpi=110)
    plt.close(fig)
