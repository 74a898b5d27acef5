#!/usr/bin/env node
import yargs from "yargs";
import { hideBin } from "yargs/helpers";
import { COLORMAPS } from "./colormap.js";
import { FigureKind, renderFigure } from "./figures.js";

export function main(argv: string[]): number {
  const args = yargs(argv)
    .scriptName("plot")
    .command("$0 <kind>", "render a figure from simulation CSV files", (y) =>
      y.positional("kind", {
        choices: ["heatmap", "angular-overlay", "decay-curve"] as const,
        describe: "figure kind",
      })
    )
    .option("inputs", {
      type: "string",
      array: true,
      demandOption: true,
      describe: "input CSV files, one panel/curve each",
    })
    .option("range", {
      type: "number",
      array: true,
      default: [0, 0.5],
      describe: "color range lo hi (heatmap only)",
    })
    .option("out", {
      type: "string",
      demandOption: true,
      describe: "output image path (.svg)",
    })
    .option("colormap", {
      type: "string",
      default: "jet",
      choices: Object.keys(COLORMAPS),
    })
    .strict()
    .exitProcess(false)
    .parseSync();

  if (args.range.length !== 2 || args.range[0] >= args.range[1]) {
    console.error("--range needs two numbers lo < hi");
    return 2;
  }
  try {
    renderFigure({
      inputs: args.inputs,
      kind: args.kind as FigureKind,
      range: [args.range[0], args.range[1]],
      out: args.out,
      colormap: COLORMAPS[args.colormap],
    });
  } catch (err) {
    console.error(String(err instanceof Error ? err.message : err));
    return 1;
  }
  return 0;
}

process.exitCode = main(hideBin(process.argv));
